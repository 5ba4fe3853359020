use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use chrono::Utc;
use clap::{Args, Parser, Subcommand};
use ntnsim::montecarlo::SimConfig;
use ntnsim_cli::config::{apply_setting, apply_text, read_config_file, split_assignment, to_config_text, ConfigError};
use ntnsim_cli::manifest::{curve_configs, CurveEntry, RunManifest, TOOL_VERSION};
use ntnsim_cli::output::{emit_csv, emit_plotdata, plot_data, write_csv, CsvRow};
use ntnsim_cli::presets::{find_preset, PRESETS};
use ntnsim_cli::run::{resolve_threads, run_curves, Curve};

/// BER simulation of OFDM, AFDM, OCDM and OTFS over NTN tapped-delay-line
/// channels with LMMSE and MMSE-SD detection.
#[derive(Parser)]
#[command(name = "ntnsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one sweep, or every curve of a preset.
    Run(RunArgs),
    /// Re-run the curves recorded in a manifest.
    Replay(ReplayArgs),
    /// Print the default configuration in config-file syntax.
    Defaults,
    /// List the figure presets.
    Presets,
}

#[derive(Args)]
struct OutputArgs {
    /// CSV output path; the CSV goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Plot data output path (one block per curve).
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Manifest path; defaults to `<out>.manifest` when --out is given.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Worker threads (0 = all cores). Results do not depend on this.
    #[arg(long, env = "NTNSIM_THREADS")]
    threads: Option<usize>,
    /// Suppress progress lines on stderr.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` configuration file; unset keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Figure preset; fixes the channel model and runs AFDM, OCDM and OTFS
    /// under both detectors.
    #[arg(long)]
    preset: Option<String>,
    /// Extra `key=value` setting, applied after the config file. Repeatable.
    #[arg(long = "set", short = 's', value_name = "KEY=VALUE")]
    settings: Vec<String>,
    /// Master seed; overrides `master_seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ReplayArgs {
    /// Manifest written by an earlier run.
    manifest_in: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

/// A failure, and the exit status it maps to.
enum Failure {
    Config(anyhow::Error),
    Run(anyhow::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self::Config(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Replay(args) => replay(args),
        Command::Defaults => {
            print!("{}", to_config_text(&SimConfig::default()));
            Ok(())
        }
        Command::Presets => {
            for p in PRESETS {
                println!("{:<10} {}", p.name, p.description);
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn build_configs(args: &RunArgs) -> Result<Vec<SimConfig>, Failure> {
    let mut base = SimConfig::default();
    if let Some(path) = &args.config {
        apply_text(&mut base, &read_config_file(path)?)?;
    }
    for s in &args.settings {
        let (key, value) = split_assignment(s)
            .ok_or_else(|| Failure::Config(anyhow::anyhow!("--set expects KEY=VALUE, got `{s}`")))?;
        apply_setting(&mut base, key, value)?;
    }
    if let Some(seed) = args.seed {
        base.master_seed = seed;
    }
    let configs = match &args.preset {
        Some(name) => {
            let preset = find_preset(name).ok_or_else(|| {
                let known: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
                Failure::Config(anyhow::anyhow!("unknown preset `{name}` (known: {})", known.join(", ")))
            })?;
            preset.expand(&base)
        }
        None => vec![base],
    };
    for c in &configs {
        c.validate().map_err(ConfigError::from)?;
    }
    Ok(configs)
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let configs = build_configs(&args)?;
    execute(&configs, args.preset.clone(), &args.output)
}

fn replay(args: ReplayArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.manifest_in)
        .with_context(|| format!("cannot read manifest {}", args.manifest_in.display()))
        .map_err(Failure::Config)?;
    let configs = curve_configs(&text)?;
    if configs.is_empty() {
        return Err(Failure::Config(anyhow::anyhow!("manifest lists no curves")));
    }
    let preset = text
        .lines()
        .find_map(|l| l.strip_prefix("preset = "))
        .filter(|p| *p != "none")
        .map(str::to_string);
    execute(&configs, preset, &args.output)
}

fn default_manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

fn execute(configs: &[SimConfig], preset: Option<String>, output: &OutputArgs) -> Result<(), Failure> {
    let threads = resolve_threads(output.threads);
    let quiet = output.quiet;
    let started = Utc::now();
    let curves: Vec<Curve> = run_curves(configs, threads, |p| {
        if !quiet {
            eprintln!("{}", p.line());
        }
    })
    .context("simulation failed")
    .map_err(Failure::Run)?;
    let finished = Utc::now();

    let rows: Vec<CsvRow> = curves.iter().flat_map(Curve::rows).collect();
    match &output.out {
        Some(path) => emit_csv(&rows, path).with_context(|| format!("cannot write {}", path.display())),
        None => write_csv(&rows, io::stdout().lock()).context("cannot write CSV to stdout"),
    }
    .map_err(Failure::Run)?;

    let omitted = match &output.plot {
        Some(path) => emit_plotdata(&rows, path)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(Failure::Run)?,
        None => plot_data(&rows).omitted_zero_ber,
    };
    if omitted > 0 && !quiet {
        eprintln!("warning: {omitted} zero-error point(s) left out of the plot data");
    }

    let skipped: usize = curves.iter().map(Curve::skipped_points).sum();
    if skipped > 0 && !quiet {
        eprintln!("note: {skipped} point(s) not run because stop_below_ber was reached");
    }

    let manifest_path = output.manifest.clone().or_else(|| output.out.as_deref().map(default_manifest_path));
    if let Some(path) = manifest_path {
        let manifest = RunManifest {
            tool_version: TOOL_VERSION.to_string(),
            preset,
            master_seed: configs[0].master_seed,
            started,
            finished,
            curves: curves
                .iter()
                .map(|c| CurveEntry {
                    config: c.config.clone(),
                    rows: c.rows(),
                })
                .collect(),
            plot_omitted_points: omitted,
            skipped_points: skipped,
        };
        std::fs::write(&path, manifest.to_text())
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(Failure::Run)?;
    }
    io::stdout().flush().context("cannot flush stdout").map_err(Failure::Run)?;
    Ok(())
}
