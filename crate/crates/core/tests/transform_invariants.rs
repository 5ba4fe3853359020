//! Transform identities checked against matrices built entry by entry in the
//! test itself, independently of the library constructors.

use std::f64::consts::PI;

use ntnsim::transforms::{
    chirp_diagonal, circular_shift_matrix, daft_matrix, dft_matrix, otfs_rx_matrix, otfs_tx_matrix, FastTransform,
};
use ntnsim::ComplexMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIZES: [usize; 4] = [4, 8, 16, 64];
const TOL: f64 = 1e-10;

fn cis(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

/// Naive unitary DFT with the phase reduced modulo one turn.
fn oracle_dft(n: usize) -> ComplexMatrix {
    let s = 1.0 / (n as f64).sqrt();
    ComplexMatrix::from_fn(n, n, |m, k| cis(-2.0 * PI * ((m * k) % n) as f64 / n as f64) * s)
}

/// `A[m,k] = e^{−j2π(c1·m² + m·k/n + c2·k²)}/√n`, written out directly.
fn oracle_daft(c1: f64, c2: f64, n: usize) -> ComplexMatrix {
    let s = 1.0 / (n as f64).sqrt();
    ComplexMatrix::from_fn(n, n, |m, k| {
        let (mf, kf) = (m as f64, k as f64);
        cis(-2.0 * PI * (c1 * mf * mf + ((m * k) % n) as f64 / n as f64 + c2 * kf * kf)) * s
    })
}

fn random_vec(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

/// Random unitary by Gram–Schmidt on random columns.
fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = random_vec(rng, n);
        for c in &cols {
            let proj: Complex64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, a) in v.iter_mut().zip(c) {
                *x -= proj * a;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    ComplexMatrix::from_fn(n, n, |r, c| cols[c][r])
}

fn unitarity_defect(a: &ComplexMatrix) -> f64 {
    a.matmul(&a.adjoint()).unwrap().max_abs_diff(&ComplexMatrix::identity(a.rows()))
}

#[test]
fn dft_matches_naive_and_is_unitary() {
    for n in SIZES {
        let f = dft_matrix(n).unwrap();
        assert!(f.max_abs_diff(&oracle_dft(n)) < TOL, "n={n}");
        assert!(unitarity_defect(&f) < TOL, "n={n}");
    }
}

#[test]
fn chirps_have_unit_modulus() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in SIZES {
        let c: f64 = rng.random_range(-1.0..1.0);
        let d = chirp_diagonal(c, n);
        for (k, z) in d.iter().enumerate() {
            assert!((z.norm() - 1.0).abs() < 1e-12);
            assert!((z - cis(-2.0 * PI * c * (k * k) as f64)).norm() < TOL, "n={n} k={k}");
        }
    }
}

#[test]
fn daft_matches_naive_and_is_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in SIZES {
        for _ in 0..3 {
            let (c1, c2) = (rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
            let a = daft_matrix(c1, c2, n).unwrap();
            assert!(a.max_abs_diff(&oracle_daft(c1, c2, n)) < TOL, "n={n}");
            assert!(unitarity_defect(&a) < TOL, "n={n}");
        }
    }
}

#[test]
fn daft_reduces_to_dft_and_fresnel() {
    for n in SIZES {
        assert!(daft_matrix(0.0, 0.0, n).unwrap().max_abs_diff(&oracle_dft(n)) < TOL);
        // Discrete Fresnel kernel e^{−jπ(m+k)²/n}/√n, valid for even n.
        let c = 1.0 / (2.0 * n as f64);
        let fresnel = ComplexMatrix::from_fn(n, n, |m, k| {
            let s = ((m + k) * (m + k)) % (2 * n);
            cis(-PI * s as f64 / n as f64) / (n as f64).sqrt()
        });
        assert!(daft_matrix(c, c, n).unwrap().max_abs_diff(&fresnel) < TOL, "n={n}");
    }
}

#[test]
fn otfs_kronecker_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (k, l) in [(2, 2), (2, 4), (4, 2), (4, 4), (8, 8)] {
        let p_tx = random_unitary(&mut rng, k);
        let tx = otfs_tx_matrix(k, l, &p_tx).unwrap();
        assert!(unitarity_defect(&tx) < TOL);
        let rx = otfs_rx_matrix(k, l, &p_tx.adjoint()).unwrap();
        assert!(rx.matmul(&tx).unwrap().max_abs_diff(&ComplexMatrix::identity(k * l)) < TOL);

        // (F_lᴴ ⊗ P)·vec(X) = vec(P·X·F_l^{−T}) with column-major vec.
        let x = ComplexMatrix::from_fn(k, l, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let vec_x: Vec<Complex64> = (0..l).flat_map(|c| x.column(c)).collect();
        let f_inv_t = oracle_dft(l).adjoint().transpose();
        let expected = p_tx.matmul(&x).unwrap().matmul(&f_inv_t).unwrap();
        let vec_expected: Vec<Complex64> = (0..l).flat_map(|c| expected.column(c)).collect();
        let got = tx.mul_vec(&vec_x).unwrap();
        let err = got.iter().zip(&vec_expected).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < TOL, "k={k} l={l}: {err}");
    }
}

#[test]
fn circular_shifts_form_a_group() {
    for n in SIZES {
        for a in 0..n.min(9) {
            for b in [0, 1, n / 2, n - 1] {
                let prod = circular_shift_matrix(a, n)
                    .unwrap()
                    .matmul(&circular_shift_matrix(b, n).unwrap())
                    .unwrap();
                assert!(prod.max_abs_diff(&circular_shift_matrix((a + b) % n, n).unwrap()) < TOL);
            }
        }
        let s = circular_shift_matrix(1, n).unwrap();
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let y = s.mul_vec(&x).unwrap();
        for i in 0..n {
            assert_eq!(y[i], x[(i + n - 1) % n]);
        }
    }
}

#[test]
fn fast_transforms_agree_with_dense_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in SIZES {
        let (c1, c2) = (rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        let fast = FastTransform::daft(c1, c2, n).unwrap();
        let dense = oracle_daft(c1, c2, n);
        let x = random_vec(&mut rng, n);
        let mut y = x.clone();
        fast.forward(&mut y);
        let expected = dense.mul_vec(&x).unwrap();
        assert!(y.iter().zip(&expected).all(|(a, b)| (a - b).norm() < TOL), "n={n}");
        fast.adjoint(&mut y);
        assert!(y.iter().zip(&x).all(|(a, b)| (a - b).norm() < TOL), "n={n}");
    }
}
