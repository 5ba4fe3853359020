//! Configuration, presets, orchestration and result files for the `ntnsim`
//! command-line tool.

pub mod config;
pub mod manifest;
pub mod output;
pub mod presets;
pub mod run;

pub use config::{parse_config_file, parse_config_str, ConfigError};
pub use output::{emit_csv, emit_plotdata, read_csv, CsvRow};
pub use run::{run_curves, Curve};
