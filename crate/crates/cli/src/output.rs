//! Result files: a flat CSV of BER records and gnuplot-style plot data.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use ntnsim::detection::DetectorKind;
use ntnsim::montecarlo::{BerRecord, ChannelModel, SimConfig};
use ntnsim::waveforms::WaveformKind;

pub const CSV_HEADER: [&str; 9] = [
    "waveform",
    "channel",
    "detector",
    "snr_db",
    "frames",
    "bits",
    "bit_errors",
    "ber",
    "seed",
];

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("CSV header mismatch: expected `{expected}`, got `{actual}`")]
    Header { expected: String, actual: String },
    #[error("CSV row {row}, column `{column}`: cannot parse `{value}`")]
    Field {
        row: usize,
        column: &'static str,
        value: String,
    },
    #[error("CSV row {row}: {reason}")]
    Inconsistent { row: usize, reason: String },
}

/// One BER point together with the curve it belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub waveform: WaveformKind,
    pub channel: ChannelModel,
    pub detector: DetectorKind,
    pub seed: u64,
    pub record: BerRecord,
}

impl CsvRow {
    pub fn new(config: &SimConfig, record: BerRecord) -> Self {
        Self {
            waveform: config.waveform,
            channel: config.channel_model,
            detector: config.detector,
            seed: config.master_seed,
            record,
        }
    }

    /// Curve label, e.g. `AFDM TDL_C MMSE_SD`.
    pub fn curve(&self) -> String {
        format!("{} {} {}", self.waveform, self.channel, self.detector)
    }

    pub fn fields(&self) -> [String; 9] {
        let r = &self.record;
        [
            self.waveform.name().to_string(),
            self.channel.name().to_string(),
            self.detector.name().to_string(),
            r.snr_db.to_string(),
            r.frames.to_string(),
            r.bits.to_string(),
            r.bit_errors.to_string(),
            format!("{:.6e}", r.ber),
            self.seed.to_string(),
        ]
    }

    /// The row exactly as it appears in the CSV file, without newline.
    pub fn line(&self) -> String {
        self.fields().join(",")
    }
}

pub fn write_csv<W: Write>(rows: &[CsvRow], writer: W) -> Result<(), OutputError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[CsvRow], path: &Path) -> Result<(), OutputError> {
    write_csv(rows, BufWriter::new(File::create(path)?))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, row: usize, idx: usize) -> Result<T, OutputError> {
    let value = rec.get(idx).unwrap_or("");
    value.parse().map_err(|_| OutputError::Field {
        row,
        column: CSV_HEADER[idx],
        value: value.to_string(),
    })
}

/// Parses a file written by [`write_csv`].
///
/// Counts are exact. The `ber` column carries seven significant digits, so
/// it is checked against `bit_errors / bits` and the record's ratio is
/// recomputed from the counts, which restores the original value exactly.
pub fn read_csv<R: Read>(reader: R) -> Result<Vec<CsvRow>, OutputError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(OutputError::Header {
            expected: CSV_HEADER.join(","),
            actual: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let waveform = field(&rec, row, 0)?;
        let channel = field(&rec, row, 1)?;
        let detector = field(&rec, row, 2)?;
        let snr_db: f64 = field(&rec, row, 3)?;
        let frames: u64 = field(&rec, row, 4)?;
        let bits: u64 = field(&rec, row, 5)?;
        let bit_errors: u64 = field(&rec, row, 6)?;
        let ber_field: f64 = field(&rec, row, 7)?;
        let seed: u64 = field(&rec, row, 8)?;
        if bit_errors > bits {
            return Err(OutputError::Inconsistent {
                row,
                reason: format!("bit_errors {bit_errors} exceed bits {bits}"),
            });
        }
        let record = BerRecord::new(snr_db, frames, bits, bit_errors);
        if (ber_field - record.ber).abs() > 1e-6 * record.ber.abs() {
            return Err(OutputError::Inconsistent {
                row,
                reason: format!("ber {ber_field} does not equal {bit_errors}/{bits}"),
            });
        }
        rows.push(CsvRow {
            waveform,
            channel,
            detector,
            seed,
            record,
        });
    }
    Ok(rows)
}

/// Plot data plus the number of rows left out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotData {
    pub text: String,
    /// Points with zero measured errors, which a log axis cannot show.
    pub omitted_zero_ber: usize,
}

/// Groups rows into one block per curve, in first-appearance order. Blocks
/// are separated by two blank lines (gnuplot's `index`) and introduced by a
/// `# <curve>` comment; each data line is `snr_db ber`.
pub fn plot_data(rows: &[CsvRow]) -> PlotData {
    let mut curves: Vec<(String, Vec<&CsvRow>)> = Vec::new();
    for row in rows {
        let name = row.curve();
        match curves.iter_mut().find(|(n, _)| *n == name) {
            Some((_, members)) => members.push(row),
            None => curves.push((name, vec![row])),
        }
    }
    let mut text = String::new();
    let mut omitted = 0;
    for (i, (name, members)) in curves.iter().enumerate() {
        if i > 0 {
            text.push_str("\n\n");
        }
        text.push_str(&format!("# {name}\n# snr_db ber\n"));
        for row in members {
            let r = &row.record;
            if r.bit_errors == 0 {
                omitted += 1;
                text.push_str(&format!("# omitted snr_db={} (no bit errors in {} bits)\n", r.snr_db, r.bits));
            } else {
                text.push_str(&format!("{} {:.6e}\n", r.snr_db, r.ber));
            }
        }
    }
    PlotData {
        text,
        omitted_zero_ber: omitted,
    }
}

/// Writes [`plot_data`] to `path` and returns the number of omitted rows.
pub fn emit_plotdata(rows: &[CsvRow], path: &Path) -> Result<usize, OutputError> {
    let data = plot_data(rows);
    std::fs::write(path, data.text)?;
    Ok(data.omitted_zero_ber)
}
