//! NTN tapped-delay-line channels: the four LEO power delay profiles, delay
//! scaling, Jakes and satellite Doppler, per-frame realizations and the
//! time-domain channel matrix.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::waveforms::LinearOperator;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TdlModel {
    TdlA,
    TdlB,
    TdlC,
    TdlD,
}

impl TdlModel {
    pub const ALL: [TdlModel; 4] = [Self::TdlA, Self::TdlB, Self::TdlC, Self::TdlD];

    pub fn name(self) -> &'static str {
        match self {
            Self::TdlA => "TDL_A",
            Self::TdlB => "TDL_B",
            Self::TdlC => "TDL_C",
            Self::TdlD => "TDL_D",
        }
    }
}

impl fmt::Display for TdlModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TdlModel {
    type Err = Error;

    /// Accepts `TDL_A`, `TDL-A`, `tdla`, `A`, ...
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, '_' | '-' | ' '))
            .collect::<String>()
            .to_ascii_uppercase();
        let key = key.strip_prefix("TDL").unwrap_or(&key);
        match key {
            "A" => Ok(Self::TdlA),
            "B" => Ok(Self::TdlB),
            "C" => Ok(Self::TdlC),
            "D" => Ok(Self::TdlD),
            _ => Err(Error::InvalidConfig(format!("unknown channel model '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fading {
    Rayleigh,
    Los,
}

impl Fading {
    pub fn name(self) -> &'static str {
        match self {
            Self::Rayleigh => "Rayleigh",
            Self::Los => "LOS",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdlTap {
    /// Delay in units of the RMS delay spread.
    pub normalized_delay: f64,
    pub power_db: f64,
    pub fading: Fading,
    pub k_factor_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TdlProfile {
    pub model: TdlModel,
    pub taps: Vec<TdlTap>,
}

const fn ray(normalized_delay: f64, power_db: f64) -> TdlTap {
    TdlTap {
        normalized_delay,
        power_db,
        fading: Fading::Rayleigh,
        k_factor_db: None,
    }
}

const fn los(normalized_delay: f64, power_db: f64, k_factor_db: f64) -> TdlTap {
    TdlTap {
        normalized_delay,
        power_db,
        fading: Fading::Los,
        k_factor_db: Some(k_factor_db),
    }
}

// 3GPP TR 38.811 NTN TDL tables; a LOS tap is listed as its specular sub-tap
// followed by the co-located Rayleigh sub-tap.
const TDL_A: [TdlTap; 3] = [ray(0.0, 0.0), ray(1.0811, -4.675), ray(2.8416, -6.482)];
const TDL_B: [TdlTap; 4] = [ray(0.0, 0.0), ray(0.7249, -1.973), ray(0.7410, -4.332), ray(5.7392, -11.914)];
const TDL_C: [TdlTap; 3] = [los(0.0, -0.394, 10.224), ray(0.0, -10.618), ray(14.8124, -23.373)];
const TDL_D: [TdlTap; 4] = [
    los(0.0, -0.284, 11.707),
    ray(0.0, -11.991),
    ray(0.5596, -9.887),
    ray(7.3340, -16.771),
];

/// The tabulated power delay profile of `model`.
pub fn builtin_profile(model: TdlModel) -> TdlProfile {
    let taps = match model {
        TdlModel::TdlA => TDL_A.to_vec(),
        TdlModel::TdlB => TDL_B.to_vec(),
        TdlModel::TdlC => TDL_C.to_vec(),
        TdlModel::TdlD => TDL_D.to_vec(),
    };
    TdlProfile { model, taps }
}

impl TdlProfile {
    /// Linear sub-tap powers normalized to unit sum.
    pub fn normalized_powers(&self) -> Vec<f64> {
        let lin: Vec<f64> = self.taps.iter().map(|t| 10f64.powf(t.power_db / 10.0)).collect();
        let total: f64 = lin.iter().sum();
        lin.iter().map(|p| p / total).collect()
    }

    /// One CSV record per sub-tap: `model,delay,power_db,fading,k_factor_db`.
    pub fn to_records(&self) -> String {
        let mut out = String::from("model,delay,power_db,fading,k_factor_db\n");
        for t in &self.taps {
            let k = t.k_factor_db.map(|k| k.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.model.name(),
                t.normalized_delay,
                t.power_db,
                t.fading.name(),
                k
            ));
        }
        out
    }
}

/// Integer sample delays `round(delay · rms_ds / T_s)` for every sub-tap.
pub fn scale_delays(profile: &TdlProfile, rms_ds_s: f64, sample_period_s: f64) -> Result<Vec<usize>> {
    if !(rms_ds_s > 0.0) || !(sample_period_s > 0.0) {
        return Err(Error::InvalidConfig(
            "delay spread and sample period must be positive".into(),
        ));
    }
    Ok(profile
        .taps
        .iter()
        .map(|t| (t.normalized_delay * rms_ds_s / sample_period_s).round() as usize)
        .collect())
}

/// Fails with [`Error::DelayExceedsFrame`] if any tap does not fit in `n`.
pub fn check_taps(taps: &[usize], n: usize) -> Result<()> {
    match taps.iter().find(|&&t| t >= n) {
        Some(&tap) => Err(Error::DelayExceedsFrame { tap, n }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerConfig {
    /// Maximum Jakes Doppler of the scatterers, Hz.
    pub alpha_max_hz: f64,
    /// Deterministic satellite-induced shift, Hz.
    pub bulk_doppler_hz: f64,
}

impl Default for DopplerConfig {
    fn default() -> Self {
        Self {
            alpha_max_hz: 491.0,
            bulk_doppler_hz: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatelliteGeometry {
    pub v_sat: f64,
    pub altitude_h: f64,
    pub earth_radius_r: f64,
    pub elevation_deg: f64,
    pub carrier_hz: f64,
}

impl SatelliteGeometry {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.v_sat, self.altitude_h, self.earth_radius_r, self.carrier_hz]
            .iter()
            .all(|&x| x >= 0.0 && x.is_finite());
        if !positive || !(self.elevation_deg > 0.0 && self.elevation_deg <= 90.0) {
            return Err(Error::InvalidConfig(format!("invalid satellite geometry {self:?}")));
        }
        Ok(())
    }
}

impl Default for SatelliteGeometry {
    fn default() -> Self {
        Self {
            v_sat: 7_500.0,
            altitude_h: 600e3,
            earth_radius_r: 6_371e3,
            elevation_deg: 50.0,
            carrier_hz: 2.55e9,
        }
    }
}

/// Doppler from satellite motion, `(v/c)·(R/(R+h))·cos(elevation)·f_c`.
pub fn satellite_doppler(geom: &SatelliteGeometry) -> f64 {
    let elev = geom.elevation_deg.to_radians();
    // cos(90°) is not exactly zero in floating point.
    let cos_elev = if geom.elevation_deg == 90.0 { 0.0 } else { elev.cos() };
    (geom.v_sat / SPEED_OF_LIGHT)
        * (geom.earth_radius_r / (geom.earth_radius_r + geom.altitude_h))
        * cos_elev
        * geom.carrier_hz
}

/// Jakes Doppler of a scatterer arriving at angle `theta`.
pub fn jakes_doppler(alpha_max_hz: f64, theta: f64) -> f64 {
    alpha_max_hz * theta.cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainMode {
    /// Sub-tap powers follow the profile, normalized to unit total power.
    PdpNormalized,
    /// Every sub-tap gets power `1/M`.
    UniformInversePaths,
}

impl GainMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::PdpNormalized => "pdp_normalized",
            Self::UniformInversePaths => "uniform_inverse_paths",
        }
    }
}

impl FromStr for GainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "pdp_normalized" | "pdp" => Ok(Self::PdpNormalized),
            "uniform_inverse_paths" | "uniform" => Ok(Self::UniformInversePaths),
            _ => Err(Error::InvalidConfig(format!("unknown gain mode '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub gain: Complex64,
    pub delay_tap: usize,
    pub doppler_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub paths: Vec<Path>,
    pub n: usize,
    pub sample_period_s: f64,
}

impl ChannelRealization {
    /// A single unit-gain, zero-delay, zero-Doppler path.
    pub fn identity(n: usize, sample_period_s: f64) -> Self {
        Self {
            paths: vec![Path {
                gain: Complex64::new(1.0, 0.0),
                delay_tap: 0,
                doppler_hz: 0.0,
            }],
            n,
            sample_period_s,
        }
    }

    /// Sparse circular-diagonal form used to apply the channel to vectors.
    pub fn operator(&self) -> Result<SparseChannel> {
        let taps: Vec<usize> = self.paths.iter().map(|p| p.delay_tap).collect();
        check_taps(&taps, self.n)?;
        let mut diagonals: Vec<(usize, Vec<Complex64>)> = Vec::new();
        for p in &self.paths {
            let idx = match diagonals.iter().position(|(d, _)| *d == p.delay_tap) {
                Some(i) => i,
                None => {
                    diagonals.push((p.delay_tap, vec![Complex64::new(0.0, 0.0); self.n]));
                    diagonals.len() - 1
                }
            };
            let step = p.doppler_hz * self.sample_period_s;
            for (i, c) in diagonals[idx].1.iter_mut().enumerate() {
                let x = step * i as f64;
                *c += p.gain * Complex64::from_polar(1.0, -2.0 * PI * (x - x.floor()));
            }
        }
        diagonals.sort_by_key(|(d, _)| *d);
        Ok(SparseChannel { n: self.n, diagonals })
    }
}

/// `H = Σ_d diag(c_d)·Π^{d}`, one entry per distinct delay.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseChannel {
    n: usize,
    diagonals: Vec<(usize, Vec<Complex64>)>,
}

impl SparseChannel {
    pub fn num_diagonals(&self) -> usize {
        self.diagonals.len()
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let n = self.n;
        let mut h = ComplexMatrix::zeros(n, n);
        for (d, coeffs) in &self.diagonals {
            for (i, &c) in coeffs.iter().enumerate() {
                h[(i, (i + n - d) % n)] += c;
            }
        }
        h
    }
}

impl LinearOperator for SparseChannel {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        out.fill(Complex64::new(0.0, 0.0));
        for (d, coeffs) in &self.diagonals {
            // out[i] += c[i]·x[(i − d) mod n]
            let (head, tail) = coeffs.split_at(*d);
            for (o, (c, xv)) in out[*d..].iter_mut().zip(tail.iter().zip(&x[..n - d])) {
                *o += c * xv;
            }
            for (o, (c, xv)) in out[..*d].iter_mut().zip(head.iter().zip(&x[n - d..])) {
                *o += c * xv;
            }
        }
    }

    fn apply_adjoint(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        out.fill(Complex64::new(0.0, 0.0));
        for (d, coeffs) in &self.diagonals {
            // out[(i − d) mod n] += conj(c[i])·x[i]
            for i in 0..n {
                out[(i + n - d) % n] += coeffs[i].conj() * x[i];
            }
        }
    }
}

/// Draws one realization: fresh gains, LOS phase and Jakes angles.
///
/// `taps` are the scaled integer delays of `profile`, one per sub-tap.
pub fn sample_realization<R: Rng + ?Sized>(
    profile: &TdlProfile,
    taps: &[usize],
    doppler: &DopplerConfig,
    gain_mode: GainMode,
    n: usize,
    sample_period_s: f64,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if profile.taps.is_empty() {
        return Err(Error::EmptyProfile);
    }
    if taps.len() != profile.taps.len() {
        return Err(Error::DimensionMismatch {
            expected: profile.taps.len(),
            actual: taps.len(),
        });
    }
    check_taps(taps, n)?;
    let powers = match gain_mode {
        GainMode::PdpNormalized => profile.normalized_powers(),
        GainMode::UniformInversePaths => vec![1.0 / profile.taps.len() as f64; profile.taps.len()],
    };
    let paths = profile
        .taps
        .iter()
        .zip(taps)
        .zip(powers)
        .map(|((tap, &delay_tap), p)| match tap.fading {
            Fading::Los => {
                let phase = 2.0 * PI * rng.random::<f64>();
                Path {
                    gain: Complex64::from_polar(p.sqrt(), phase),
                    delay_tap,
                    doppler_hz: doppler.bulk_doppler_hz,
                }
            }
            Fading::Rayleigh => {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                let theta = rng.random_range(-PI..=PI);
                Path {
                    gain: Complex64::new(re, im) * (p / 2.0).sqrt(),
                    delay_tap,
                    doppler_hz: doppler.bulk_doppler_hz + jakes_doppler(doppler.alpha_max_hz, theta),
                }
            }
        })
        .collect();
    Ok(ChannelRealization {
        paths,
        n,
        sample_period_s,
    })
}

/// Dense `H = Σ_m g_m·D(ν_m)·Π^{ℓ_m}` with `D(ν) = diag(exp(−j2πν·i·T_s))`.
pub fn channel_matrix(real: &ChannelRealization) -> Result<ComplexMatrix> {
    Ok(real.operator()?.to_dense())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::circular_shift_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TS_256: f64 = 1.0 / (256.0 * 15e3);

    #[test]
    fn table_rows() {
        let a = builtin_profile(TdlModel::TdlA);
        assert_eq!(a.taps.len(), 3);
        assert!(a.taps.iter().all(|t| t.fading == Fading::Rayleigh));
        let delays: Vec<f64> = a.taps.iter().map(|t| t.normalized_delay).collect();
        let powers: Vec<f64> = a.taps.iter().map(|t| t.power_db).collect();
        assert_eq!(delays, vec![0.0, 1.0811, 2.8416]);
        assert_eq!(powers, vec![0.0, -4.675, -6.482]);

        let c = builtin_profile(TdlModel::TdlC);
        assert_eq!(c.taps[0], los(0.0, -0.394, 10.224));
        assert_eq!(c.taps[1], ray(0.0, -10.618));
        assert_eq!(c.taps[2], ray(14.8124, -23.373));
    }

    #[test]
    fn profile_invariants() {
        for model in TdlModel::ALL {
            let p = builtin_profile(model);
            assert_eq!(p.taps[0].normalized_delay, 0.0);
            let los: Vec<_> = p.taps.iter().filter(|t| t.fading == Fading::Los).collect();
            match model {
                TdlModel::TdlA | TdlModel::TdlB => assert!(los.is_empty()),
                TdlModel::TdlC | TdlModel::TdlD => {
                    assert_eq!(los.len(), 1);
                    let l = los[0];
                    let diffuse = p
                        .taps
                        .iter()
                        .find(|t| t.fading == Fading::Rayleigh && t.normalized_delay == l.normalized_delay)
                        .unwrap();
                    let k = l.k_factor_db.unwrap();
                    assert!((l.power_db - diffuse.power_db - k).abs() <= 1e-3, "{model}");
                }
            }
            assert!((p.normalized_powers().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn records_export() {
        let text = builtin_profile(TdlModel::TdlD).to_records();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "TDL_D,0,-0.284,LOS,11.707");
        assert_eq!(lines[4], "TDL_D,7.334,-16.771,Rayleigh,");
    }

    #[test]
    fn delay_scaling() {
        let a = scale_delays(&builtin_profile(TdlModel::TdlA), 100e-9, TS_256).unwrap();
        assert_eq!(a, vec![0, 0, 1]);
        let c = scale_delays(&builtin_profile(TdlModel::TdlC), 100e-9, TS_256).unwrap();
        assert_eq!(c, vec![0, 0, 6]);
        for model in TdlModel::ALL {
            let t = scale_delays(&builtin_profile(model), 1e-6, TS_256).unwrap();
            assert!(t.windows(2).all(|w| w[0] <= w[1]));
        }
        assert!(scale_delays(&builtin_profile(TdlModel::TdlA), 0.0, TS_256).is_err());
        assert_eq!(check_taps(&[0, 300], 256), Err(Error::DelayExceedsFrame { tap: 300, n: 256 }));
    }

    #[test]
    fn satellite_doppler_values() {
        let f = satellite_doppler(&SatelliteGeometry::default());
        // (7500/c)·(6371/6971)·cos(50°)·2.55e9
        let expected = 7500.0 / SPEED_OF_LIGHT * (6371.0 / 6971.0) * 50f64.to_radians().cos() * 2.55e9;
        assert!((f - expected).abs() < 1e-9);
        assert!((f - 3.748e4).abs() < 5.0, "{f}");
        let overhead = SatelliteGeometry {
            elevation_deg: 90.0,
            ..Default::default()
        };
        assert_eq!(satellite_doppler(&overhead), 0.0);
        let parked = SatelliteGeometry {
            v_sat: 0.0,
            ..Default::default()
        };
        assert_eq!(satellite_doppler(&parked), 0.0);
        assert!(SatelliteGeometry {
            elevation_deg: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn jakes_values() {
        assert_eq!(jakes_doppler(491.0, 0.0), 491.0);
        assert!(jakes_doppler(491.0, PI / 2.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 100_000;
        let samples: Vec<f64> = (0..draws)
            .map(|_| jakes_doppler(491.0, rng.random_range(-PI..=PI)))
            .collect();
        let mean = samples.iter().sum::<f64>() / draws as f64;
        // Var[α cos θ] = α²/2.
        let sigma = 491.0 / 2f64.sqrt();
        assert!(mean.abs() < 3.0 * sigma / (draws as f64).sqrt(), "{mean}");
    }

    #[test]
    fn uniform_gain_mode_powers() {
        let p = builtin_profile(TdlModel::TdlA);
        let taps = vec![0, 0, 1];
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let draws = 100_000;
        let mut acc = [0.0; 3];
        for _ in 0..draws {
            let r = sample_realization(&p, &taps, &DopplerConfig::default(), GainMode::UniformInversePaths, 256, TS_256, &mut rng)
                .unwrap();
            for (a, path) in acc.iter_mut().zip(&r.paths) {
                *a += path.gain.norm_sqr();
            }
        }
        for a in acc {
            let mean = a / draws as f64;
            assert!((mean - 1.0 / 3.0).abs() < 0.02 / 3.0, "{mean}");
        }
    }

    #[test]
    fn los_k_factor_is_reproduced() {
        let p = builtin_profile(TdlModel::TdlC);
        let taps = vec![0, 0, 6];
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let draws = 100_000;
        let (mut los_p, mut ray_p) = (0.0, 0.0);
        for _ in 0..draws {
            let r = sample_realization(&p, &taps, &DopplerConfig::default(), GainMode::PdpNormalized, 256, TS_256, &mut rng)
                .unwrap();
            los_p += r.paths[0].gain.norm_sqr();
            ray_p += r.paths[1].gain.norm_sqr();
        }
        let ratio = los_p / ray_p;
        let k = 10f64.powf(10.224 / 10.0);
        assert!((ratio / k - 1.0).abs() < 0.03, "{ratio} vs {k}");
    }

    #[test]
    fn static_channel_has_no_doppler() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let doppler = DopplerConfig {
            alpha_max_hz: 0.0,
            bulk_doppler_hz: 0.0,
        };
        for model in TdlModel::ALL {
            let p = builtin_profile(model);
            let taps = scale_delays(&p, 100e-9, TS_256).unwrap();
            let r = sample_realization(&p, &taps, &doppler, GainMode::PdpNormalized, 256, TS_256, &mut rng).unwrap();
            assert!(r.paths.iter().all(|path| path.doppler_hz == 0.0));
        }
    }

    #[test]
    fn doppler_support_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let doppler = DopplerConfig {
            alpha_max_hz: 491.0,
            bulk_doppler_hz: -1200.0,
        };
        let p = builtin_profile(TdlModel::TdlD);
        let taps = scale_delays(&p, 100e-9, TS_256).unwrap();
        for _ in 0..1000 {
            let r = sample_realization(&p, &taps, &doppler, GainMode::PdpNormalized, 256, TS_256, &mut rng).unwrap();
            for path in &r.paths {
                assert!((path.doppler_hz - doppler.bulk_doppler_hz).abs() <= doppler.alpha_max_hz);
            }
            assert_eq!(r.paths[0].doppler_hz, doppler.bulk_doppler_hz);
        }
    }

    #[test]
    fn empty_profile_is_rejected() {
        let p = TdlProfile {
            model: TdlModel::TdlA,
            taps: vec![],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = sample_realization(&p, &[], &DopplerConfig::default(), GainMode::PdpNormalized, 8, 1.0, &mut rng);
        assert_eq!(err, Err(Error::EmptyProfile));
    }

    fn single(gain: f64, delay_tap: usize, doppler_hz: f64, n: usize, ts: f64) -> ChannelRealization {
        ChannelRealization {
            paths: vec![Path {
                gain: Complex64::new(gain, 0.0),
                delay_tap,
                doppler_hz,
            }],
            n,
            sample_period_s: ts,
        }
    }

    #[test]
    fn channel_matrix_examples() {
        let ts = 1.0 / (4.0 * 15e3);
        assert_eq!(channel_matrix(&single(1.0, 0, 0.0, 4, ts)).unwrap(), ComplexMatrix::identity(4));
        assert_eq!(
            channel_matrix(&single(1.0, 1, 0.0, 4, ts)).unwrap(),
            circular_shift_matrix(1, 4).unwrap()
        );
        let h = channel_matrix(&single(1.0, 0, 15e3, 4, ts)).unwrap();
        let e = |x: f64| Complex64::from_polar(1.0, x);
        let expected = ComplexMatrix::from_diagonal(&[e(0.), e(-PI / 2.), e(-PI), e(-3. * PI / 2.)]);
        assert!(h.max_abs_diff(&expected) < 1e-12);
        assert!(channel_matrix(&single(1.0, 4, 0.0, 4, ts)).is_err());
    }

    #[test]
    fn sparse_operator_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let p = builtin_profile(TdlModel::TdlB);
        let taps = vec![0, 3, 3, 7];
        let r = sample_realization(&p, &taps, &DopplerConfig::default(), GainMode::PdpNormalized, 16, 1e-6, &mut rng).unwrap();
        let op = r.operator().unwrap();
        assert_eq!(op.num_diagonals(), 3);
        let h = op.to_dense();
        let x: Vec<Complex64> = (0..16).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let mut y = vec![Complex64::new(0.0, 0.0); 16];
        op.apply(&x, &mut y);
        let want = h.mul_vec(&x).unwrap();
        assert!(y.iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-12));
        op.apply_adjoint(&x, &mut y);
        let want = h.adjoint_mul_vec(&x).unwrap();
        assert!(y.iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-12));
        // Exactly one non-zero circular diagonal per distinct delay.
        let nonzero_diagonals = (0..16)
            .filter(|d| (0..16).any(|i| h[(i, (i + 16 - d) % 16)].norm() > 0.0))
            .count();
        assert_eq!(nonzero_diagonals, 3);
    }

    #[test]
    fn model_names_parse() {
        for m in TdlModel::ALL {
            assert_eq!(m.name().parse::<TdlModel>().unwrap(), m);
        }
        assert_eq!("TDL-c".parse::<TdlModel>().unwrap(), TdlModel::TdlC);
        assert!("TDL_E".parse::<TdlModel>().is_err());
    }
}
