//! Flat `key = value` configuration.
//!
//! Every key maps one-to-one onto a [`SimConfig`] field (the nested stop rule
//! and Doppler settings are flattened). Unset keys keep their defaults, so an
//! empty file yields the stock simulation set-up. The same keys can be given
//! on the command line as `--set key=value`.
//!
//! ```text
//! # comment
//! waveform = OTFS
//! snr_db_points = 0:2:24
//! master_seed = 7
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ntnsim::channel::GainMode;
use ntnsim::detection::DetectorKind;
use ntnsim::montecarlo::{ChannelModel, SimConfig};
use ntnsim::waveforms::WaveformKind;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("unknown waveform `{0}` (expected one of OFDM, AFDM, OCDM, OTFS)")]
    UnknownWaveform(String),
    #[error("unknown channel model `{0}` (expected one of TDL_A, TDL_B, TDL_C, TDL_D, AWGN)")]
    UnknownChannelModel(String),
    #[error("unknown detector `{0}` (expected LMMSE or MMSE_SD)")]
    UnknownDetector(String),
    #[error("unknown gain mode `{0}` (expected pdp_normalized or uniform_inverse_paths)")]
    UnknownGainMode(String),
    #[error("`{key}`: cannot parse `{value}` as {expected}")]
    InvalidValue {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("`{key}` = {value} is out of range: {reason}")]
    OutOfRange {
        key: String,
        value: String,
        reason: &'static str,
    },
    #[error(transparent)]
    Validation(#[from] ntnsim::Error),
}

/// All recognised keys, in snapshot order.
pub const KEYS: [&str; 22] = [
    "waveform",
    "n",
    "k",
    "l",
    "c1",
    "c2",
    "xi",
    "channel_model",
    "detector",
    "modulation_order",
    "snr_db_points",
    "min_bit_errors",
    "max_frames",
    "batch_frames",
    "stop_below_ber",
    "rms_ds_s",
    "alpha_max_hz",
    "bulk_doppler_hz",
    "gain_mode",
    "carrier_hz",
    "subcarrier_spacing_hz",
    "master_seed",
];

fn invalid(key: &str, value: &str, expected: &'static str) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        expected,
    }
}

fn out_of_range(key: &str, value: &str, reason: &'static str) -> ConfigError {
    ConfigError::OutOfRange {
        key: key.to_string(),
        value: value.to_string(),
        reason,
    }
}

fn parse_u64(key: &str, value: &str) -> Result<u64, ConfigError> {
    value.parse().map_err(|_| invalid(key, value, "a non-negative integer"))
}

fn parse_positive_count(key: &str, value: &str) -> Result<u64, ConfigError> {
    match parse_u64(key, value)? {
        0 => Err(out_of_range(key, value, "must be at least 1")),
        v => Ok(v),
    }
}

fn parse_finite(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = value.parse().map_err(|_| invalid(key, value, "a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(out_of_range(key, value, "must be finite"))
    }
}

fn parse_positive(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v = parse_finite(key, value)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(out_of_range(key, value, "must be positive"))
    }
}

fn is_none(value: &str) -> bool {
    value.eq_ignore_ascii_case("none") || value.eq_ignore_ascii_case("auto")
}

/// Expands an SNR list. Items are separated by commas; each item is a single
/// value or an inclusive `start:step:stop` range.
pub fn parse_snr_points(value: &str) -> Result<Vec<f64>, ConfigError> {
    const KEY: &str = "snr_db_points";
    let mut points = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').map(str::trim).collect();
        match parts.as_slice() {
            [single] => points.push(parse_finite(KEY, single)?),
            [start, step, stop] => {
                let (start, step, stop) = (
                    parse_finite(KEY, start)?,
                    parse_finite(KEY, step)?,
                    parse_finite(KEY, stop)?,
                );
                if step == 0.0 || (stop - start) * step < 0.0 {
                    return Err(out_of_range(KEY, item, "range step must be non-zero and point towards stop"));
                }
                // Tolerate rounding in the division so that 0:0.1:1 includes 1.
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                if count > 100_000 {
                    return Err(out_of_range(KEY, item, "range expands to more than 100000 points"));
                }
                points.extend((0..count).map(|i| start + i as f64 * step));
            }
            _ => return Err(invalid(KEY, item, "a value or a start:step:stop range")),
        }
    }
    Ok(points)
}

/// Applies one `key = value` setting.
pub fn apply_setting(config: &mut SimConfig, key: &str, value: &str) -> Result<(), ConfigError> {
    let value = value.trim();
    match key.trim() {
        "waveform" => {
            config.waveform = value
                .parse::<WaveformKind>()
                .map_err(|_| ConfigError::UnknownWaveform(value.to_string()))?
        }
        "n" => config.n = parse_positive_count("n", value)? as usize,
        "k" => config.k = parse_positive_count("k", value)? as usize,
        "l" => config.l = parse_positive_count("l", value)? as usize,
        "c1" => config.c1 = if is_none(value) { None } else { Some(parse_finite("c1", value)?) },
        "c2" => config.c2 = parse_finite("c2", value)?,
        "xi" => config.xi = parse_u64("xi", value)?,
        "channel_model" => {
            config.channel_model = value
                .parse::<ChannelModel>()
                .map_err(|_| ConfigError::UnknownChannelModel(value.to_string()))?
        }
        "detector" => {
            config.detector = value
                .parse::<DetectorKind>()
                .map_err(|_| ConfigError::UnknownDetector(value.to_string()))?
        }
        "modulation_order" => {
            let order = parse_u64("modulation_order", value)?;
            if !matches!(order, 4 | 16 | 64) {
                return Err(out_of_range("modulation_order", value, "must be 4, 16 or 64"));
            }
            config.modulation_order = order as usize;
        }
        "snr_db_points" => config.snr_db_points = parse_snr_points(value)?,
        "min_bit_errors" => config.stop.min_bit_errors = parse_positive_count("min_bit_errors", value)?,
        "max_frames" => config.stop.max_frames = parse_positive_count("max_frames", value)?,
        "batch_frames" => config.batch_frames = parse_positive_count("batch_frames", value)?,
        "stop_below_ber" => {
            config.stop_below_ber = if is_none(value) {
                None
            } else {
                let t = parse_finite("stop_below_ber", value)?;
                if !(0.0..=1.0).contains(&t) {
                    return Err(out_of_range("stop_below_ber", value, "must lie in [0, 1]"));
                }
                Some(t)
            }
        }
        "rms_ds_s" => config.rms_ds_s = parse_positive("rms_ds_s", value)?,
        "alpha_max_hz" => {
            let a = parse_finite("alpha_max_hz", value)?;
            if a < 0.0 {
                return Err(out_of_range("alpha_max_hz", value, "must be non-negative"));
            }
            config.doppler.alpha_max_hz = a;
        }
        "bulk_doppler_hz" => config.doppler.bulk_doppler_hz = parse_finite("bulk_doppler_hz", value)?,
        "gain_mode" => {
            config.gain_mode = value
                .parse::<GainMode>()
                .map_err(|_| ConfigError::UnknownGainMode(value.to_string()))?
        }
        "carrier_hz" => config.carrier_hz = parse_positive("carrier_hz", value)?,
        "subcarrier_spacing_hz" => config.subcarrier_spacing_hz = parse_positive("subcarrier_spacing_hz", value)?,
        "master_seed" => config.master_seed = parse_u64("master_seed", value)?,
        other => return Err(ConfigError::UnknownKey(other.to_string())),
    }
    Ok(())
}

/// Splits `key=value` (as given to `--set`).
pub fn split_assignment(text: &str) -> Option<(&str, &str)> {
    let (k, v) = text.split_once('=')?;
    let k = k.trim();
    if k.is_empty() {
        None
    } else {
        Some((k, v.trim()))
    }
}

/// Applies every setting in `text` on top of `config` without validating.
pub fn apply_text(config: &mut SimConfig, text: &str) -> Result<(), ConfigError> {
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = split_assignment(line).ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            text: raw.trim().to_string(),
        })?;
        apply_setting(config, key, value)?;
    }
    Ok(())
}

/// Parses configuration text over the defaults and validates the result.
pub fn parse_config_str(text: &str) -> Result<SimConfig, ConfigError> {
    let mut config = SimConfig::default();
    apply_text(&mut config, text)?;
    config.validate()?;
    Ok(config)
}

pub fn parse_config_file(path: &Path) -> Result<SimConfig, ConfigError> {
    parse_config_str(&read_config_file(path)?)
}

pub fn read_config_file(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn format_snr_points(points: &[f64]) -> String {
    points.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")
}

/// Renders every key of `config`. Floats use the shortest exact
/// representation, so `parse_config_str(&to_config_text(c))` returns `c`.
pub fn to_config_text(config: &SimConfig) -> String {
    let opt = |v: Option<f64>, none: &str| v.map_or(none.to_string(), |x| x.to_string());
    let values: [String; 22] = [
        config.waveform.name().to_string(),
        config.n.to_string(),
        config.k.to_string(),
        config.l.to_string(),
        opt(config.c1, "auto"),
        config.c2.to_string(),
        config.xi.to_string(),
        config.channel_model.name().to_string(),
        config.detector.name().to_string(),
        config.modulation_order.to_string(),
        format_snr_points(&config.snr_db_points),
        config.stop.min_bit_errors.to_string(),
        config.stop.max_frames.to_string(),
        config.batch_frames.to_string(),
        opt(config.stop_below_ber, "none"),
        config.rms_ds_s.to_string(),
        config.doppler.alpha_max_hz.to_string(),
        config.doppler.bulk_doppler_hz.to_string(),
        config.gain_mode.name().to_string(),
        config.carrier_hz.to_string(),
        config.subcarrier_spacing_hz.to_string(),
        config.master_seed.to_string(),
    ];
    let mut out = String::new();
    for (key, value) in KEYS.iter().zip(values) {
        let _ = writeln!(out, "{key} = {value}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ntnsim::channel::TdlModel;

    #[test]
    fn empty_config_is_default() {
        let c = parse_config_str("").unwrap();
        assert_eq!(c, SimConfig::default());
        assert_eq!(c.carrier_hz, 2.55e9);
        assert_eq!(c.subcarrier_spacing_hz, 15e3);
        assert_eq!(c.modulation_order, 16);
        assert_eq!((c.n, c.k, c.l), (256, 16, 16));
        assert_eq!(c.doppler.alpha_max_hz, 491.0);
        assert_eq!(c.channel_model, ChannelModel::Tdl(TdlModel::TdlC));
        assert_eq!(c.detector, DetectorKind::MmseSd);
        assert_eq!(c.waveform, WaveformKind::Afdm);
    }

    #[test]
    fn comments_and_blank_lines() {
        let c = parse_config_str("# header\n\n waveform = otfs  # trailing\nmaster_seed=9\n").unwrap();
        assert_eq!(c.waveform, WaveformKind::Otfs);
        assert_eq!(c.master_seed, 9);
    }

    #[test]
    fn snr_range_expansion() {
        let p = parse_snr_points("0:2:24").unwrap();
        assert_eq!(p.len(), 13);
        assert_eq!(p[0], 0.0);
        assert_eq!(p[12], 24.0);
        assert!(p.windows(2).all(|w| w[1] - w[0] == 2.0));
        assert_eq!(parse_snr_points("0:0.1:1").unwrap().len(), 11);
        assert_eq!(parse_snr_points("5, 10,15").unwrap(), vec![5.0, 10.0, 15.0]);
        assert_eq!(parse_snr_points("24:-12:0").unwrap(), vec![24.0, 12.0, 0.0]);
        assert!(parse_snr_points("").unwrap().is_empty());
        assert!(matches!(parse_snr_points("0:0:5"), Err(ConfigError::OutOfRange { .. })));
        assert!(matches!(parse_snr_points("0:1"), Err(ConfigError::InvalidValue { .. })));
        assert!(matches!(parse_snr_points("inf"), Err(ConfigError::OutOfRange { .. })));
    }

    #[test]
    fn otfs_grid_mismatch_is_rejected() {
        let err = parse_config_str("waveform = OTFS\nk = 8\n").unwrap_err();
        assert!(matches!(err, ConfigError::Validation(_)), "{err}");
        assert!(err.to_string().contains("OTFS grid"));
    }

    #[test]
    fn distinct_diagnostics() {
        let cases: [(&str, fn(&ConfigError) -> bool); 8] = [
            ("waveform = GFDM", |e| matches!(e, ConfigError::UnknownWaveform(_))),
            ("channel_model = TDL_E", |e| matches!(e, ConfigError::UnknownChannelModel(_))),
            ("detector = ML", |e| matches!(e, ConfigError::UnknownDetector(_))),
            ("gain_mode = flat", |e| matches!(e, ConfigError::UnknownGainMode(_))),
            ("modulation_order = 8", |e| matches!(e, ConfigError::OutOfRange { .. })),
            ("max_frames = 0", |e| matches!(e, ConfigError::OutOfRange { .. })),
            ("n = many", |e| matches!(e, ConfigError::InvalidValue { .. })),
            ("colour = blue", |e| matches!(e, ConfigError::UnknownKey(_))),
        ];
        let mut messages = Vec::new();
        for (text, check) in cases {
            let err = parse_config_str(text).unwrap_err();
            assert!(check(&err), "{text}: {err}");
            messages.push(err.to_string());
        }
        messages.sort();
        messages.dedup();
        assert_eq!(messages.len(), 8);
        assert!(matches!(parse_config_str("just words"), Err(ConfigError::Syntax { line: 1, .. })));
    }

    #[test]
    fn delay_exceeding_frame_is_a_validation_error() {
        let err = parse_config_str("n = 16\nrms_ds_s = 1e-3\nwaveform = AFDM").unwrap_err();
        assert!(matches!(err, ConfigError::Validation(_)), "{err}");
    }

    #[test]
    fn snapshot_round_trip() {
        let mut c = SimConfig::default();
        for text in [
            "waveform = OTFS\nc1 = 0.0123\nstop_below_ber = 1e-5\nsnr_db_points = -3.5,0.1,7",
            "channel_model = AWGN\ndetector = LMMSE\ngain_mode = uniform\nbulk_doppler_hz = -1234.5",
        ] {
            apply_text(&mut c, text).unwrap();
            let text = to_config_text(&c);
            assert_eq!(text.lines().count(), KEYS.len());
            assert_eq!(parse_config_str(&text).unwrap(), c);
        }
        assert_eq!(parse_config_str(&to_config_text(&SimConfig::default())).unwrap(), SimConfig::default());
    }
}
