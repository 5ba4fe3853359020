//! Sequential execution of one or more BER curves.

use ntnsim::montecarlo::{run_sweep_with_threads, BerRecord, SimConfig};

use crate::output::CsvRow;

/// A finished sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub config: SimConfig,
    pub records: Vec<BerRecord>,
}

impl Curve {
    pub fn rows(&self) -> Vec<CsvRow> {
        self.records.iter().map(|r| CsvRow::new(&self.config, *r)).collect()
    }

    /// Requested SNR points that were not run because of `stop_below_ber`.
    pub fn skipped_points(&self) -> usize {
        self.config.snr_db_points.len() - self.records.len()
    }

    pub fn label(&self) -> String {
        label(&self.config)
    }
}

pub fn label(config: &SimConfig) -> String {
    format!("{} {} {}", config.waveform, config.channel_model, config.detector)
}

#[derive(Debug, Clone, Copy)]
pub enum Progress<'a> {
    CurveStarted {
        index: usize,
        total: usize,
        config: &'a SimConfig,
    },
    PointDone {
        index: usize,
        total: usize,
        record: &'a BerRecord,
    },
}

impl Progress<'_> {
    /// The line reported on stderr; point indices are 1-based.
    pub fn line(&self) -> String {
        match self {
            Self::CurveStarted { index, total, config } => {
                format!("curve {}/{} {}", index + 1, total, label(config))
            }
            Self::PointDone { index, total, record } => {
                format!("point {}/{} snr={}dB ber={:.6e}", index + 1, total, record.snr_db, record.ber)
            }
        }
    }
}

/// Worker count: an explicit positive value, otherwise every available core.
pub fn resolve_threads(requested: Option<usize>) -> usize {
    match requested {
        Some(n) if n > 0 => n,
        _ => std::thread::available_parallelism().map_or(1, |n| n.get()),
    }
}

/// Runs every curve in order. Results do not depend on `threads`.
pub fn run_curves(
    configs: &[SimConfig],
    threads: usize,
    mut progress: impl FnMut(Progress<'_>) + Send,
) -> ntnsim::Result<Vec<Curve>> {
    let mut curves = Vec::with_capacity(configs.len());
    for (index, config) in configs.iter().enumerate() {
        progress(Progress::CurveStarted {
            index,
            total: configs.len(),
            config,
        });
        let records = run_sweep_with_threads(config, threads, |i, total, record| {
            progress(Progress::PointDone { index: i, total, record })
        })?;
        curves.push(Curve {
            config: config.clone(),
            records,
        });
    }
    Ok(curves)
}
