//! OFDM, AFDM, OCDM and OTFS modulators, demodulators and effective channels.
//!
//! Every waveform is described by a unitary demodulation transform `T`:
//! modulation is `s = Tᴴ·x`, demodulation `y = T·r`, and a time-domain channel
//! `H` appears in the symbol domain as `T·H·Tᴴ`.
//!
//! | waveform | `T`                          |
//! |----------|------------------------------|
//! | OFDM     | `F`                          |
//! | AFDM     | `Λ_{c2}·F·Λ_{c1}`            |
//! | OCDM     | `Λ_c·F·Λ_c`, `c = 1/(2n)`    |
//! | OTFS     | `F_l ⊗ P_rx`                 |
//!
//! For AFDM `c1` chirps the time-domain samples (it is applied before the
//! DFT) and `c2` chirps the DFT output, which is the assignment under which
//! the [`afdm_chirp_rates`] rule separates paths of different delay.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::transforms::{daft_matrix, dft_matrix, otfs_rx_matrix, FastTransform};

/// Anything that can be applied to a time-domain vector as a linear map.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[Complex64], out: &mut [Complex64]);
    fn apply_adjoint(&self, x: &[Complex64], out: &mut [Complex64]);
}

impl LinearOperator for ComplexMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        out.copy_from_slice(&self.mul_vec(x).expect("operator dimension"));
    }

    fn apply_adjoint(&self, x: &[Complex64], out: &mut [Complex64]) {
        out.copy_from_slice(&self.adjoint_mul_vec(x).expect("operator dimension"));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveformKind {
    Ofdm,
    Afdm,
    Ocdm,
    Otfs,
}

impl WaveformKind {
    pub const ALL: [WaveformKind; 4] = [Self::Ofdm, Self::Afdm, Self::Ocdm, Self::Otfs];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ofdm => "OFDM",
            Self::Afdm => "AFDM",
            Self::Ocdm => "OCDM",
            Self::Otfs => "OTFS",
        }
    }
}

impl fmt::Display for WaveformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WaveformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown waveform '{s}'")))
    }
}

/// A waveform together with its precomputed transform.
#[derive(Debug, Clone)]
pub struct WaveformSpec {
    kind: WaveformKind,
    n: usize,
    k: usize,
    l: usize,
    c1: f64,
    c2: f64,
    pulse_tx: Option<ComplexMatrix>,
    pulse_rx: Option<ComplexMatrix>,
    transform: FastTransform,
}

const PULSE_TOL: f64 = 1e-10;

impl WaveformSpec {
    pub fn ofdm(n: usize) -> Result<Self> {
        Self::chirped(WaveformKind::Ofdm, n, 0.0, 0.0)
    }

    /// AFDM with time-domain chirp `c1` and post-DFT chirp `c2`.
    pub fn afdm(n: usize, c1: f64, c2: f64) -> Result<Self> {
        if !c1.is_finite() || !c2.is_finite() {
            return Err(Error::InvalidConfig("chirp rates must be finite".into()));
        }
        Self::chirped(WaveformKind::Afdm, n, c1, c2)
    }

    pub fn ocdm(n: usize) -> Result<Self> {
        let c = 1.0 / (2.0 * n.max(1) as f64);
        Self::chirped(WaveformKind::Ocdm, n, c, c)
    }

    /// OTFS on a `k×l` grid with rectangular (identity) pulses.
    pub fn otfs(k: usize, l: usize) -> Result<Self> {
        Ok(Self {
            kind: WaveformKind::Otfs,
            n: k * l,
            k,
            l,
            c1: 0.0,
            c2: 0.0,
            pulse_tx: None,
            pulse_rx: None,
            transform: FastTransform::otfs(k, l, None)?,
        })
    }

    /// OTFS with explicit pulses. Both must be unitary and matched,
    /// `P_rx·P_tx = I`, so that demodulation inverts modulation.
    pub fn otfs_with_pulses(k: usize, l: usize, pulse_tx: ComplexMatrix, pulse_rx: ComplexMatrix) -> Result<Self> {
        for (name, p) in [("pulse_tx", &pulse_tx), ("pulse_rx", &pulse_rx)] {
            if p.rows() != k || p.cols() != k {
                return Err(Error::InvalidDimension(format!(
                    "{name} must be {k}x{k}, got {}x{}",
                    p.rows(),
                    p.cols()
                )));
            }
            if !p.is_unitary(PULSE_TOL) {
                return Err(Error::InvalidConfig(format!("{name} is not unitary")));
            }
        }
        let product = pulse_rx.matmul(&pulse_tx)?;
        if product.max_abs_diff(&ComplexMatrix::identity(k)) > PULSE_TOL {
            return Err(Error::InvalidConfig("pulse_rx·pulse_tx must be the identity".into()));
        }
        Ok(Self {
            kind: WaveformKind::Otfs,
            n: k * l,
            k,
            l,
            c1: 0.0,
            c2: 0.0,
            transform: FastTransform::otfs(k, l, Some(pulse_rx.clone()))?,
            pulse_tx: Some(pulse_tx),
            pulse_rx: Some(pulse_rx),
        })
    }

    fn chirped(kind: WaveformKind, n: usize, c1: f64, c2: f64) -> Result<Self> {
        Ok(Self {
            kind,
            n,
            k: 0,
            l: 0,
            c1,
            c2,
            pulse_tx: None,
            pulse_rx: None,
            transform: FastTransform::daft(c2, c1, n)?,
        })
    }

    pub fn kind(&self) -> WaveformKind {
        self.kind
    }

    /// Frame length in symbols (and time-domain samples).
    pub fn n(&self) -> usize {
        self.n
    }

    /// OTFS grid `(k, l)`; `(0, 0)` for the chirped waveforms.
    pub fn grid(&self) -> (usize, usize) {
        (self.k, self.l)
    }

    /// `(c1, c2)`; zero for OFDM and OTFS.
    pub fn chirp_rates(&self) -> (f64, f64) {
        (self.c1, self.c2)
    }

    /// OTFS `(P_tx, P_rx)` when non-rectangular pulses are in use.
    pub fn pulses(&self) -> Option<(&ComplexMatrix, &ComplexMatrix)> {
        self.pulse_tx.as_ref().zip(self.pulse_rx.as_ref())
    }

    pub fn transform(&self) -> &FastTransform {
        &self.transform
    }

    /// Dense demodulation matrix `T`, built from the reference constructors.
    pub fn demodulation_matrix(&self) -> ComplexMatrix {
        match self.kind {
            WaveformKind::Ofdm => dft_matrix(self.n),
            WaveformKind::Afdm | WaveformKind::Ocdm => daft_matrix(self.c2, self.c1, self.n),
            WaveformKind::Otfs => {
                let p = self
                    .pulse_rx
                    .clone()
                    .unwrap_or_else(|| ComplexMatrix::identity(self.k));
                otfs_rx_matrix(self.k, self.l, &p)
            }
        }
        .expect("dimensions validated at construction")
    }

    /// Dense modulation matrix `Tᴴ`.
    pub fn modulation_matrix(&self) -> ComplexMatrix {
        self.demodulation_matrix().adjoint()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: len,
            });
        }
        Ok(())
    }
}

/// `s = Tᴴ·x`. For OTFS `frame` is `vec(x)` of the `k×l` delay-Doppler grid.
pub fn modulate(spec: &WaveformSpec, frame: &[Complex64]) -> Result<Vec<Complex64>> {
    spec.check_len(frame.len())?;
    let mut s = frame.to_vec();
    spec.transform.adjoint(&mut s);
    Ok(s)
}

/// `y = T·r`.
pub fn demodulate(spec: &WaveformSpec, received: &[Complex64]) -> Result<Vec<Complex64>> {
    spec.check_len(received.len())?;
    let mut y = received.to_vec();
    spec.transform.forward(&mut y);
    Ok(y)
}

/// `T·h·Tᴴ`.
pub fn effective_channel(spec: &WaveformSpec, h: &ComplexMatrix) -> Result<ComplexMatrix> {
    if h.rows() != spec.n || h.cols() != spec.n {
        return Err(Error::InvalidDimension(format!(
            "channel must be {0}x{0}, got {1}x{2}",
            spec.n,
            h.rows(),
            h.cols()
        )));
    }
    effective_channel_of(spec, h)
}

/// `T·H·Tᴴ` for any channel operator, built one column at a time.
pub fn effective_channel_of(spec: &WaveformSpec, h: &impl LinearOperator) -> Result<ComplexMatrix> {
    spec.check_len(h.dim())?;
    let n = spec.n;
    let mut out = ComplexMatrix::zeros(n, n);
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    let mut hc = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        col.fill(Complex64::new(0.0, 0.0));
        col[c] = Complex64::new(1.0, 0.0);
        spec.transform.adjoint(&mut col);
        h.apply(&col, &mut hc);
        spec.transform.forward(&mut hc);
        out.set_column(c, &hc);
    }
    Ok(out)
}

/// The effective channel's Gram matrix `H_effᴴ·H_eff = T·Hᴴ·H·Tᴴ`, computed
/// without forming `H_eff`.
pub fn effective_gram_of(spec: &WaveformSpec, h: &impl LinearOperator) -> Result<ComplexMatrix> {
    spec.check_len(h.dim())?;
    let n = spec.n;
    let mut out = ComplexMatrix::zeros(n, n);
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    let mut hc = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        col.fill(Complex64::new(0.0, 0.0));
        col[c] = Complex64::new(1.0, 0.0);
        spec.transform.adjoint(&mut col);
        h.apply(&col, &mut hc);
        h.apply_adjoint(&hc, &mut col);
        spec.transform.forward(&mut col);
        out.set_column(c, &col);
    }
    // Exact Hermitian symmetry keeps the downstream factorizations clean.
    for i in 0..n {
        out[(i, i)].im = 0.0;
        for j in 0..i {
            let avg = (out[(i, j)] + out[(j, i)].conj()) * 0.5;
            out[(i, j)] = avg;
            out[(j, i)] = avg.conj();
        }
    }
    Ok(out)
}

/// Matched-filter output `H_effᴴ·y = T·Hᴴ·Tᴴ·y`.
pub fn effective_matched_filter(spec: &WaveformSpec, h: &impl LinearOperator, y: &[Complex64]) -> Result<Vec<Complex64>> {
    spec.check_len(y.len())?;
    spec.check_len(h.dim())?;
    let mut v = y.to_vec();
    spec.transform.adjoint(&mut v);
    let mut out = vec![Complex64::new(0.0, 0.0); spec.n];
    h.apply_adjoint(&v, &mut out);
    spec.transform.forward(&mut out);
    Ok(out)
}

/// Chirp rates chosen from the maximum normalized Doppler and delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpRates {
    pub c1: f64,
    pub c2: f64,
    /// Whether `2(f_max + ξ)(l_max + 1) + l_max ≤ n` holds. A `false` value
    /// is a warning: paths may overlap in the DAFT domain.
    pub orthogonality_ok: bool,
}

/// `c1 = (2(f_max + ξ) + 1)/(2n)`, `c2 = 0`.
pub fn afdm_chirp_rates(f_max: u64, xi: u64, l_max: u64, n: usize) -> ChirpRates {
    let n = n.max(1);
    let c1 = (2 * (f_max + xi) + 1) as f64 / (2 * n) as f64;
    let needed = 2 * (f_max + xi) * (l_max + 1) + l_max;
    ChirpRates {
        c1,
        c2: 0.0,
        orthogonality_ok: needed <= n as u64,
    }
}
