//! Run provenance: what was run, by which tool version, when, and digests of
//! every produced record.
//!
//! The manifest is plain text. Its `[curve i]` sections hold the complete
//! configuration of each curve in config-file syntax, so a manifest can be
//! replayed to regenerate the same records bit for bit.

use std::fmt::Write as _;

use chrono::{DateTime, SecondsFormat, Utc};
use ntnsim::montecarlo::SimConfig;
use sha2::{Digest, Sha256};

use crate::config::{apply_text, to_config_text, ConfigError};
use crate::output::CsvRow;

pub const TOOL_NAME: &str = "ntnsim";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub struct CurveEntry {
    pub config: SimConfig,
    pub rows: Vec<CsvRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub tool_version: String,
    pub preset: Option<String>,
    pub master_seed: u64,
    pub started: DateTime<Utc>,
    pub finished: DateTime<Utc>,
    pub curves: Vec<CurveEntry>,
    /// Zero-error points left out of the plot data.
    pub plot_omitted_points: usize,
    /// SNR points not run because `stop_below_ber` ended a sweep early.
    pub skipped_points: usize,
}

/// SHA-256 of a CSV row as written, in lowercase hex.
pub fn record_checksum(row: &CsvRow) -> String {
    hex::encode(Sha256::digest(row.line().as_bytes()))
}

fn timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {TOOL_NAME} run manifest");
        let _ = writeln!(out, "tool = {TOOL_NAME} {}", self.tool_version);
        let _ = writeln!(out, "preset = {}", self.preset.as_deref().unwrap_or("none"));
        let _ = writeln!(out, "master_seed = {}", self.master_seed);
        let _ = writeln!(out, "started = {}", timestamp(&self.started));
        let _ = writeln!(out, "finished = {}", timestamp(&self.finished));
        let _ = writeln!(out, "curves = {}", self.curves.len());
        let _ = writeln!(
            out,
            "records = {}",
            self.curves.iter().map(|c| c.rows.len()).sum::<usize>()
        );
        let _ = writeln!(out, "plot_omitted_points = {}", self.plot_omitted_points);
        let _ = writeln!(out, "skipped_points = {}", self.skipped_points);
        for (i, curve) in self.curves.iter().enumerate() {
            let _ = writeln!(out, "\n[curve {}]", i + 1);
            out.push_str(&to_config_text(&curve.config));
            let _ = writeln!(out, "\n[records {}]", i + 1);
            for row in &curve.rows {
                let _ = writeln!(out, "sha256:{} {}", record_checksum(row), row.line());
            }
        }
        out
    }
}

/// Reads the curve configurations back out of a manifest's text.
pub fn curve_configs(manifest: &str) -> Result<Vec<SimConfig>, ConfigError> {
    let mut configs = Vec::new();
    let mut section: Option<String> = None;
    let finish = |section: &mut Option<String>, configs: &mut Vec<SimConfig>| -> Result<(), ConfigError> {
        if let Some(text) = section.take() {
            let mut config = SimConfig::default();
            apply_text(&mut config, &text)?;
            config.validate()?;
            configs.push(config);
        }
        Ok(())
    };
    for line in manifest.lines() {
        let trimmed = line.trim();
        if trimmed.starts_with('[') {
            finish(&mut section, &mut configs)?;
            if trimmed.starts_with("[curve ") {
                section = Some(String::new());
            }
        } else if let Some(text) = section.as_mut() {
            text.push_str(line);
            text.push('\n');
        }
    }
    finish(&mut section, &mut configs)?;
    Ok(configs)
}
