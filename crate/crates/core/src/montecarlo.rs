//! Monte-Carlo BER engine.
//!
//! Each frame draws bits, maps them to QAM, modulates, passes the signal
//! through a fresh channel realization, adds noise, demodulates, detects and
//! counts bit errors. A frame's randomness comes from its own ChaCha stream
//! keyed by `(master_seed, snr_db, frame_index)`, so any frame can be
//! replayed in isolation and results do not depend on scheduling.
//!
//! Detection works on the sufficient statistics `H_effᴴH_eff` and `H_effᴴy`,
//! which are computed from the sparse time-domain channel with fast
//! transforms instead of forming `H_eff` densely.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::channel::{
    builtin_profile, check_taps, sample_realization, scale_delays, ChannelRealization, DopplerConfig, GainMode,
    TdlModel, TdlProfile,
};
use crate::detection::{detect_from_gram, DetectorConfig, DetectorKind};
use crate::error::{Error, Result};
use crate::qam::Constellation;
use crate::waveforms::{
    afdm_chirp_rates, demodulate, effective_gram_of, effective_matched_filter, modulate, LinearOperator,
    WaveformKind, WaveformSpec,
};

pub use crate::qam::{qam_demap, qam_map};

/// A tapped-delay-line profile, or the identity channel (pure AWGN).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelModel {
    Tdl(TdlModel),
    Awgn,
}

impl ChannelModel {
    pub fn name(self) -> &'static str {
        match self {
            Self::Tdl(m) => m.name(),
            Self::Awgn => "AWGN",
        }
    }
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("awgn") || s.trim().eq_ignore_ascii_case("identity") {
            return Ok(Self::Awgn);
        }
        s.parse().map(Self::Tdl)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopRule {
    pub min_bit_errors: u64,
    pub max_frames: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            min_bit_errors: 500,
            max_frames: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub waveform: WaveformKind,
    /// Frame length for OFDM/AFDM/OCDM; must equal `k·l` for OTFS.
    pub n: usize,
    pub k: usize,
    pub l: usize,
    /// AFDM time-domain chirp; derived from the Doppler when `None`.
    pub c1: Option<f64>,
    /// AFDM post-DFT chirp.
    pub c2: f64,
    /// AFDM guard width ξ.
    pub xi: u64,
    pub channel_model: ChannelModel,
    pub detector: DetectorKind,
    pub modulation_order: usize,
    pub snr_db_points: Vec<f64>,
    pub stop: StopRule,
    /// Frames dispatched together; the stop rule is checked between batches.
    pub batch_frames: u64,
    /// Skip the remaining SNR points once a point's BER falls below this.
    pub stop_below_ber: Option<f64>,
    pub rms_ds_s: f64,
    pub doppler: DopplerConfig,
    pub gain_mode: GainMode,
    pub carrier_hz: f64,
    pub subcarrier_spacing_hz: f64,
    pub master_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            waveform: WaveformKind::Afdm,
            n: 256,
            k: 16,
            l: 16,
            c1: None,
            c2: 0.0,
            xi: 1,
            channel_model: ChannelModel::Tdl(TdlModel::TdlC),
            detector: DetectorKind::MmseSd,
            modulation_order: 16,
            snr_db_points: (0..=12).map(|i| 2.0 * i as f64).collect(),
            stop: StopRule::default(),
            batch_frames: 8,
            stop_below_ber: None,
            rms_ds_s: 100e-9,
            doppler: DopplerConfig::default(),
            gain_mode: GainMode::PdpNormalized,
            carrier_hz: 2.55e9,
            subcarrier_spacing_hz: 15e3,
            master_seed: 42,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n == 0 {
            return bad("frame length n must be at least 1".into());
        }
        if self.waveform == WaveformKind::Otfs && self.k * self.l != self.n {
            return bad(format!("OTFS grid {}x{} does not match frame length {}", self.k, self.l, self.n));
        }
        if let Some(p) = self.snr_db_points.iter().find(|p| !p.is_finite()) {
            return bad(format!("SNR point {p} is not finite"));
        }
        if self.stop.min_bit_errors < 1 {
            return bad("min_bit_errors must be at least 1".into());
        }
        if self.stop.max_frames < 1 {
            return bad("max_frames must be at least 1".into());
        }
        if self.batch_frames < 1 {
            return bad("batch_frames must be at least 1".into());
        }
        if !(self.rms_ds_s > 0.0) || !self.rms_ds_s.is_finite() {
            return bad(format!("rms delay spread {} must be positive", self.rms_ds_s));
        }
        if !(self.subcarrier_spacing_hz > 0.0) || !self.subcarrier_spacing_hz.is_finite() {
            return bad("subcarrier spacing must be positive".into());
        }
        if !(self.carrier_hz > 0.0) || !self.carrier_hz.is_finite() {
            return bad("carrier frequency must be positive".into());
        }
        if !(self.doppler.alpha_max_hz >= 0.0)
            || !self.doppler.alpha_max_hz.is_finite()
            || !self.doppler.bulk_doppler_hz.is_finite()
        {
            return bad("Doppler parameters must be finite and alpha_max non-negative".into());
        }
        if let Some(c1) = self.c1 {
            if !c1.is_finite() {
                return bad("c1 must be finite".into());
            }
        }
        if !self.c2.is_finite() {
            return bad("c2 must be finite".into());
        }
        if let Some(t) = self.stop_below_ber {
            if !(t >= 0.0 && t <= 1.0) {
                return bad(format!("stop_below_ber {t} must lie in [0, 1]"));
            }
        }
        Constellation::qam(self.modulation_order)?;
        let taps = self.delay_taps()?;
        check_taps(&taps, self.n)
    }

    /// `T_s = 1/(n·Δf)`.
    pub fn sample_period_s(&self) -> f64 {
        1.0 / (self.n as f64 * self.subcarrier_spacing_hz)
    }

    fn profile(&self) -> Option<TdlProfile> {
        match self.channel_model {
            ChannelModel::Tdl(m) => Some(builtin_profile(m)),
            ChannelModel::Awgn => None,
        }
    }

    pub fn delay_taps(&self) -> Result<Vec<usize>> {
        match self.profile() {
            Some(p) => scale_delays(&p, self.rms_ds_s, self.sample_period_s()),
            None => Ok(vec![0]),
        }
    }

    /// Maximum normalized Doppler rounded up to whole subcarriers.
    pub fn f_max(&self) -> u64 {
        let total = self.doppler.alpha_max_hz + self.doppler.bulk_doppler_hz.abs();
        (total / self.subcarrier_spacing_hz).ceil() as u64
    }

    pub fn waveform_spec(&self) -> Result<WaveformSpec> {
        match self.waveform {
            WaveformKind::Ofdm => WaveformSpec::ofdm(self.n),
            WaveformKind::Ocdm => WaveformSpec::ocdm(self.n),
            WaveformKind::Otfs => {
                if self.k * self.l != self.n {
                    return Err(Error::InvalidConfig(format!(
                        "OTFS grid {}x{} does not match frame length {}",
                        self.k, self.l, self.n
                    )));
                }
                WaveformSpec::otfs(self.k, self.l)
            }
            WaveformKind::Afdm => {
                let c1 = match self.c1 {
                    Some(c1) => c1,
                    None => {
                        let l_max = self.delay_taps()?.into_iter().max().unwrap_or(0) as u64;
                        afdm_chirp_rates(self.f_max(), self.xi, l_max, self.n).c1
                    }
                };
                WaveformSpec::afdm(self.n, c1, self.c2)
            }
        }
    }
}

/// Accumulated counts at one SNR point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerRecord {
    pub snr_db: f64,
    pub frames: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
}

impl BerRecord {
    pub fn new(snr_db: f64, frames: u64, bits: u64, bit_errors: u64) -> Self {
        let ber = if bits == 0 { 0.0 } else { bit_errors as f64 / bits as f64 };
        Self {
            snr_db,
            frames,
            bits,
            bit_errors,
            ber,
        }
    }
}

/// `σ² = 10^(−snr_db/10)` for unit-energy symbols over a unit-power channel.
pub fn snr_to_sigma2(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Adds i.i.d. `CN(0, σ²)` noise.
pub fn awgn<R: Rng + ?Sized>(signal: &[Complex64], sigma2: f64, rng: &mut R) -> Vec<Complex64> {
    let s = (sigma2 / 2.0).sqrt();
    signal
        .iter()
        .map(|&x| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            x + Complex64::new(re, im) * s
        })
        .collect()
}

/// The random stream owned by one frame.
pub fn frame_rng(master_seed: u64, snr_db: f64, frame_index: u64) -> ChaCha8Rng {
    let snr = if snr_db == 0.0 { 0.0 } else { snr_db };
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&snr.to_bits().to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(frame_index);
    rng
}

/// Errors and bits of one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FrameOutcome {
    pub bit_errors: u64,
    pub bits: u64,
}

/// A validated configuration with everything that does not change per frame
/// precomputed. Shared immutably across worker threads.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    spec: WaveformSpec,
    profile: Option<TdlProfile>,
    taps: Vec<usize>,
    constellation: Constellation,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let spec = config.waveform_spec()?;
        let profile = config.profile();
        let taps = config.delay_taps()?;
        let constellation = Constellation::qam(config.modulation_order)?;
        Ok(Self {
            config,
            spec,
            profile,
            taps,
            constellation,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn waveform(&self) -> &WaveformSpec {
        &self.spec
    }

    pub fn bits_per_frame(&self) -> u64 {
        (self.spec.n() * self.constellation.bits_per_symbol()) as u64
    }

    fn realization(&self, rng: &mut ChaCha8Rng) -> Result<ChannelRealization> {
        let n = self.spec.n();
        let ts = self.config.sample_period_s();
        match &self.profile {
            Some(p) => sample_realization(p, &self.taps, &self.config.doppler, self.config.gain_mode, n, ts, rng),
            None => Ok(ChannelRealization::identity(n, ts)),
        }
    }

    /// Simulates one frame with noise variance `sigma2`.
    pub fn run_frame_with_sigma2(&self, snr_db: f64, sigma2: f64, frame_index: u64) -> Result<FrameOutcome> {
        let mut rng = frame_rng(self.config.master_seed, snr_db, frame_index);
        let n = self.spec.n();
        let bits: Vec<u8> = (0..self.bits_per_frame()).map(|_| rng.random::<bool>() as u8).collect();
        let x = qam_map(&bits, &self.constellation)?;
        let s = modulate(&self.spec, &x)?;

        let real = self.realization(&mut rng)?;
        let h = real.operator()?;
        let mut r = vec![Complex64::new(0.0, 0.0); n];
        h.apply(&s, &mut r);
        let r = awgn(&r, sigma2, &mut rng);
        let y = demodulate(&self.spec, &r)?;

        let gram = effective_gram_of(&self.spec, &h)?;
        let matched = effective_matched_filter(&self.spec, &h, &y)?;
        let det = DetectorConfig::new(self.config.detector, sigma2, self.constellation.clone());
        let result = detect_from_gram(&gram, &matched, &det)?;
        let decided = qam_demap(&result.symbols, &self.constellation);
        let bit_errors = decided.iter().zip(&bits).filter(|(a, b)| a != b).count() as u64;
        Ok(FrameOutcome {
            bit_errors,
            bits: bits.len() as u64,
        })
    }

    pub fn run_frame(&self, snr_db: f64, frame_index: u64) -> Result<FrameOutcome> {
        self.run_frame_with_sigma2(snr_db, snr_to_sigma2(snr_db), frame_index)
    }

    /// Runs one SNR point until the stop rule fires.
    pub fn run_point(&self, snr_db: f64) -> Result<BerRecord> {
        let stop = self.config.stop;
        let (mut frames, mut bits, mut errors) = (0u64, 0u64, 0u64);
        while frames < stop.max_frames && errors < stop.min_bit_errors {
            let batch = self.config.batch_frames.min(stop.max_frames - frames);
            let outcomes: Vec<FrameOutcome> = (frames..frames + batch)
                .into_par_iter()
                .map(|i| self.run_frame(snr_db, i))
                .collect::<Result<_>>()?;
            for o in outcomes {
                bits += o.bits;
                errors += o.bit_errors;
            }
            frames += batch;
        }
        Ok(BerRecord::new(snr_db, frames, bits, errors))
    }

    /// Runs every SNR point in order, reporting each finished record.
    pub fn run_sweep_with(&self, mut progress: impl FnMut(usize, usize, &BerRecord)) -> Result<Vec<BerRecord>> {
        let total = self.config.snr_db_points.len();
        let mut records = Vec::with_capacity(total);
        for (i, &snr) in self.config.snr_db_points.iter().enumerate() {
            let rec = self.run_point(snr)?;
            progress(i, total, &rec);
            records.push(rec);
            if let Some(t) = self.config.stop_below_ber {
                if rec.ber < t {
                    break;
                }
            }
        }
        Ok(records)
    }
}

/// One frame of `config` at `snr_db`; deterministic in `(seed, snr, index)`.
pub fn run_frame(config: &SimConfig, snr_db: f64, frame_index: u64) -> Result<FrameOutcome> {
    Simulation::new(config.clone())?.run_frame(snr_db, frame_index)
}

pub fn run_sweep(config: &SimConfig) -> Result<Vec<BerRecord>> {
    Simulation::new(config.clone())?.run_sweep_with(|_, _, _| {})
}

/// [`run_sweep`] on a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads(
    config: &SimConfig,
    threads: usize,
    progress: impl FnMut(usize, usize, &BerRecord) + Send,
) -> Result<Vec<BerRecord>> {
    let sim = Simulation::new(config.clone())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| sim.run_sweep_with(progress))
}
