//! Unitary building blocks: DFT, diagonal chirps, the discrete affine Fourier
//! transform, the OTFS Kronecker transforms and circular shifts.
//!
//! The dense constructors are the conformance reference. [`FastTransform`]
//! applies the same operators in `O(n log n)` with `rustfft` and is what the
//! simulator uses per frame.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidDimension("transform size must be at least 1".into()));
    }
    Ok(())
}

/// `exp(-j 2π frac)`.
fn unit_phase(frac: f64) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * PI * frac)
}

/// Unitary DFT matrix, `F[m,k] = exp(-j2π·m·k/n)/√n`.
pub fn dft_matrix(n: usize) -> Result<ComplexMatrix> {
    check_dim(n)?;
    let scale = 1.0 / (n as f64).sqrt();
    Ok(ComplexMatrix::from_fn(n, n, |m, k| {
        unit_phase(((m * k) % n) as f64 / n as f64) * scale
    }))
}

/// Diagonal entries `exp(-j2π·c·k²)` for `k = 0..n`.
pub fn chirp_diagonal(c: f64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let x = c * (k * k) as f64;
            unit_phase(x - x.floor())
        })
        .collect()
}

/// Diagonal chirp matrix `Λ_c = diag(exp(-j2π·c·k²))`.
pub fn chirp_matrix(c: f64, n: usize) -> Result<ComplexMatrix> {
    check_dim(n)?;
    Ok(ComplexMatrix::from_diagonal(&chirp_diagonal(c, n)))
}

/// Discrete affine Fourier transform `Λ_{c1}·F·Λ_{c2}`. The right-hand chirp
/// acts on the time-domain samples, the left-hand one on the DFT output.
pub fn daft_matrix(c1: f64, c2: f64, n: usize) -> Result<ComplexMatrix> {
    check_dim(n)?;
    let left = chirp_diagonal(c1, n);
    let right = chirp_diagonal(c2, n);
    let f = dft_matrix(n)?;
    Ok(ComplexMatrix::from_fn(n, n, |m, k| left[m] * f[(m, k)] * right[k]))
}

fn check_pulse(k: usize, l: usize, pulse: &ComplexMatrix) -> Result<()> {
    check_dim(k)?;
    check_dim(l)?;
    if pulse.rows() != k || pulse.cols() != k {
        return Err(Error::InvalidDimension(format!(
            "pulse must be {k}x{k}, got {}x{}",
            pulse.rows(),
            pulse.cols()
        )));
    }
    Ok(())
}

/// OTFS modulation matrix `F_lᴴ ⊗ P_tx` acting on `vec(x)` of a `k×l` grid.
pub fn otfs_tx_matrix(k: usize, l: usize, p_tx: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_pulse(k, l, p_tx)?;
    Ok(dft_matrix(l)?.adjoint().kron(p_tx))
}

/// OTFS demodulation matrix `F_l ⊗ P_rx`.
pub fn otfs_rx_matrix(k: usize, l: usize, p_rx: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_pulse(k, l, p_rx)?;
    Ok(dft_matrix(l)?.kron(p_rx))
}

/// Permutation `Π^shift` with `(Π^shift·x)[i] = x[(i − shift) mod n]`.
/// Shifts of `n` or more wrap modulo `n`.
pub fn circular_shift_matrix(shift: usize, n: usize) -> Result<ComplexMatrix> {
    check_dim(n)?;
    let s = shift % n;
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, (i + n - s) % n)] = Complex64::new(1.0, 0.0);
    }
    Ok(m)
}

/// FFT-backed application of a unitary transform `T` and its adjoint.
#[derive(Clone)]
pub enum FastTransform {
    /// `Λ_left · F · Λ_right`; OFDM, AFDM and OCDM.
    Daft {
        n: usize,
        left: Vec<Complex64>,
        right: Vec<Complex64>,
        fwd: Arc<dyn Fft<f64>>,
        inv: Arc<dyn Fft<f64>>,
    },
    /// `F_l ⊗ P` on column-major `k×l` grids; `pulse` is `None` for `P = I`.
    Otfs {
        k: usize,
        l: usize,
        pulse: Option<ComplexMatrix>,
        fwd: Arc<dyn Fft<f64>>,
        inv: Arc<dyn Fft<f64>>,
    },
}

impl fmt::Debug for FastTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Daft { n, .. } => write!(f, "FastTransform::Daft(n={n})"),
            Self::Otfs { k, l, pulse, .. } => write!(
                f,
                "FastTransform::Otfs(k={k}, l={l}, pulse={})",
                if pulse.is_some() { "custom" } else { "identity" }
            ),
        }
    }
}

impl FastTransform {
    pub fn daft(c1: f64, c2: f64, n: usize) -> Result<Self> {
        check_dim(n)?;
        let mut planner = FftPlanner::new();
        Ok(Self::Daft {
            n,
            left: chirp_diagonal(c1, n),
            right: chirp_diagonal(c2, n),
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        })
    }

    /// `pulse` is the receive pulse `P`; pass `None` for rectangular pulses.
    pub fn otfs(k: usize, l: usize, pulse: Option<ComplexMatrix>) -> Result<Self> {
        if let Some(p) = &pulse {
            check_pulse(k, l, p)?;
        } else {
            check_dim(k)?;
            check_dim(l)?;
        }
        let mut planner = FftPlanner::new();
        Ok(Self::Otfs {
            k,
            l,
            pulse,
            fwd: planner.plan_fft_forward(l),
            inv: planner.plan_fft_inverse(l),
        })
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Daft { n, .. } => *n,
            Self::Otfs { k, l, .. } => k * l,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// In place `v ← T·v`.
    pub fn forward(&self, v: &mut [Complex64]) {
        assert_eq!(v.len(), self.len());
        match self {
            Self::Daft {
                n, left, right, fwd, ..
            } => {
                for (x, r) in v.iter_mut().zip(right) {
                    *x *= r;
                }
                fwd.process(v);
                let s = 1.0 / (*n as f64).sqrt();
                for (x, l) in v.iter_mut().zip(left) {
                    *x *= l * s;
                }
            }
            Self::Otfs {
                k, l, pulse, fwd, ..
            } => {
                if let Some(p) = pulse {
                    apply_blockwise(p, *k, v, false);
                }
                fft_across_blocks(fwd.as_ref(), *k, *l, v);
            }
        }
    }

    /// In place `v ← Tᴴ·v`.
    pub fn adjoint(&self, v: &mut [Complex64]) {
        assert_eq!(v.len(), self.len());
        match self {
            Self::Daft {
                n, left, right, inv, ..
            } => {
                for (x, l) in v.iter_mut().zip(left) {
                    *x *= l.conj();
                }
                inv.process(v);
                let s = 1.0 / (*n as f64).sqrt();
                for (x, r) in v.iter_mut().zip(right) {
                    *x *= r.conj() * s;
                }
            }
            Self::Otfs {
                k, l, pulse, inv, ..
            } => {
                fft_across_blocks(inv.as_ref(), *k, *l, v);
                if let Some(p) = pulse {
                    apply_blockwise(p, *k, v, true);
                }
            }
        }
    }
}

/// Applies `P` (or `Pᴴ`) to each contiguous length-`k` block.
fn apply_blockwise(p: &ComplexMatrix, k: usize, v: &mut [Complex64], adjoint: bool) {
    for block in v.chunks_mut(k) {
        let out = if adjoint {
            p.adjoint_mul_vec(block)
        } else {
            p.mul_vec(block)
        }
        .expect("pulse dimension checked at construction");
        block.copy_from_slice(&out);
    }
}

/// Unitary length-`l` FFT over the strided sequences `v[i + k·j]`, `j = 0..l`.
fn fft_across_blocks(fft: &dyn Fft<f64>, k: usize, l: usize, v: &mut [Complex64]) {
    let s = 1.0 / (l as f64).sqrt();
    let mut buf = vec![Complex64::new(0.0, 0.0); l];
    for i in 0..k {
        for (j, b) in buf.iter_mut().enumerate() {
            *b = v[i + k * j];
        }
        fft.process(&mut buf);
        for (j, b) in buf.iter().enumerate() {
            v[i + k * j] = b * s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dft_small_cases() {
        assert_eq!(dft_matrix(1).unwrap(), ComplexMatrix::identity(1));
        let f2 = dft_matrix(2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let expected = ComplexMatrix::from_row_major(2, 2, vec![c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)]).unwrap();
        assert!(f2.max_abs_diff(&expected) < 1e-15);
        assert!(dft_matrix(8).unwrap().unitarity_error() < 1e-10);
        assert!(matches!(dft_matrix(0), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn chirp_examples() {
        assert_eq!(chirp_matrix(0.0, 4).unwrap(), ComplexMatrix::identity(4));
        let m = chirp_matrix(1.0 / 8.0, 4).unwrap();
        let e = |x: f64| Complex64::from_polar(1.0, x);
        let expected = ComplexMatrix::from_diagonal(&[e(0.0), e(-PI / 4.0), e(-PI), e(-PI / 4.0)]);
        assert!(m.max_abs_diff(&expected) < 1e-12);
        let d = chirp_diagonal(0.137, 16);
        assert!(d.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn daft_reductions() {
        let d = daft_matrix(0.0, 0.0, 8).unwrap();
        assert!(d.max_abs_diff(&dft_matrix(8).unwrap()) < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = daft_matrix(rng.random(), rng.random(), 16).unwrap();
        assert!(a.unitarity_error() < 1e-10);
    }

    #[test]
    fn ocdm_daft_is_discrete_fresnel_kernel() {
        // Λ_c F Λ_c with c = 1/(2n) has entries exp(-jπ(m+k)²/n)/√n.
        let n = 8;
        let c = 1.0 / (2.0 * n as f64);
        let a = daft_matrix(c, c, n).unwrap();
        let fresnel = ComplexMatrix::from_fn(n, n, |m, k| {
            let q = ((m + k) * (m + k)) as f64;
            Complex64::from_polar(1.0 / (n as f64).sqrt(), -PI * q / n as f64)
        });
        assert!(a.max_abs_diff(&fresnel) < 1e-12);
    }

    #[test]
    fn otfs_matrices() {
        let one = ComplexMatrix::identity(1);
        assert_eq!(otfs_tx_matrix(1, 1, &one).unwrap(), one);
        assert_eq!(otfs_rx_matrix(1, 1, &one).unwrap(), one);
        let tx = otfs_tx_matrix(2, 1, &ComplexMatrix::identity(2)).unwrap();
        assert!(tx.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
        let i4 = ComplexMatrix::identity(4);
        let tx = otfs_tx_matrix(4, 4, &i4).unwrap();
        let rx = otfs_rx_matrix(4, 4, &i4).unwrap();
        assert!(tx.unitarity_error() < 1e-10);
        assert!(rx.matmul(&tx).unwrap().max_abs_diff(&ComplexMatrix::identity(16)) < 1e-10);
        let rx2 = otfs_rx_matrix(2, 2, &ComplexMatrix::identity(2)).unwrap();
        let expected = dft_matrix(2).unwrap().kron(&ComplexMatrix::identity(2));
        assert_eq!(rx2, expected);
        assert!(otfs_tx_matrix(4, 4, &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn circular_shift_examples() {
        assert_eq!(circular_shift_matrix(0, 4).unwrap(), ComplexMatrix::identity(4));
        let x = vec![c(1., 0.), c(2., 0.), c(3., 0.)];
        let y = circular_shift_matrix(1, 3).unwrap().mul_vec(&x).unwrap();
        assert_eq!(y, vec![c(3., 0.), c(1., 0.), c(2., 0.)]);
        let p = circular_shift_matrix(2, 5)
            .unwrap()
            .matmul(&circular_shift_matrix(3, 5).unwrap())
            .unwrap();
        assert_eq!(p, circular_shift_matrix(0, 5).unwrap());
        assert_eq!(circular_shift_matrix(6, 5).unwrap(), circular_shift_matrix(1, 5).unwrap());
    }

    #[test]
    fn fast_daft_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for &n in &[1usize, 7, 16, 30] {
            let (c1, c2) = (rng.random::<f64>(), rng.random::<f64>());
            let dense = daft_matrix(c1, c2, n).unwrap();
            let fast = FastTransform::daft(c1, c2, n).unwrap();
            let x: Vec<Complex64> = (0..n).map(|_| c(rng.random(), rng.random())).collect();
            let mut y = x.clone();
            fast.forward(&mut y);
            let want = dense.mul_vec(&x).unwrap();
            assert!(y.iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-12));
            let mut z = x.clone();
            fast.adjoint(&mut z);
            let want = dense.adjoint_mul_vec(&x).unwrap();
            assert!(z.iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-12));
        }
    }

    #[test]
    fn fast_otfs_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let (k, l) = (3, 5);
        let pulse = daft_matrix(0.3, 0.1, k).unwrap();
        for p in [None, Some(pulse)] {
            let dense_p = p.clone().unwrap_or_else(|| ComplexMatrix::identity(k));
            let dense = otfs_rx_matrix(k, l, &dense_p).unwrap();
            let fast = FastTransform::otfs(k, l, p).unwrap();
            let x: Vec<Complex64> = (0..k * l).map(|_| c(rng.random(), rng.random())).collect();
            let mut y = x.clone();
            fast.forward(&mut y);
            let want = dense.mul_vec(&x).unwrap();
            assert!(y.iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-12));
            let mut z = x.clone();
            fast.adjoint(&mut z);
            let want = dense.adjoint_mul_vec(&x).unwrap();
            assert!(z.iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-12));
        }
    }
}
