//! Dense complex matrices and the small amount of linear algebra the
//! detectors need (Hermitian positive-definite factorization and inversion).

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for c in 0..self.cols.min(8) {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}j ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Complex64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn set_column(&mut self, c: usize, values: &[Complex64]) {
        debug_assert_eq!(values.len(), self.rows);
        for (r, &v) in values.iter().enumerate() {
            self[(r, c)] = v;
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for (k, &a) in self.row(r).iter().enumerate() {
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `self^H * x` without materializing the adjoint.
    pub fn adjoint_mul_vec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                actual: x.len(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for (r, &xr) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a.conj() * xr;
            }
        }
        Ok(out)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        Self::from_fn(rows, cols, |r, c| {
            self[(r / other.rows, c / other.cols)] * other[(r % other.rows, c % other.cols)]
        })
    }

    /// Gram matrix `self^H * self`.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut g = Self::zeros(n, n);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let a = row[i].conj();
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let g_row = &mut g.data[i * n..(i + 1) * n];
                for (gij, &b) in g_row.iter_mut().zip(row) {
                    *gij += a * b;
                }
            }
        }
        g
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `‖M·Mᴴ − I‖_max`.
    pub fn unitarity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let prod = self.matmul(&self.adjoint()).expect("square");
        prod.max_abs_diff(&Self::identity(self.rows))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                actual: other.rows * other.cols,
            });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Lower-triangular Cholesky factor `L` of a Hermitian positive-definite
/// matrix, `A = L·Lᴴ`. Only the lower triangle of `a` is read.
pub fn cholesky(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::InvalidDimension(format!(
            "cholesky needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    let n = a.rows;
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let lj: Vec<Complex64> = l.row(j)[..j].to_vec();
        let d = a[(j, j)].re - lj.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex64::new(djj, 0.0);
        let inv = 1.0 / djj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for (x, y) in l.row(i)[..j].iter().zip(&lj) {
                s -= x * y.conj();
            }
            l[(i, j)] = s * inv;
        }
    }
    Ok(l)
}

/// Solves `L·Lᴴ·x = b` given the Cholesky factor `L`.
pub fn cholesky_solve(l: &ComplexMatrix, b: &[Complex64]) -> Vec<Complex64> {
    let n = l.rows;
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for (lik, yk) in l.row(i)[..i].iter().zip(&y[..i]) {
            s -= lik * yk;
        }
        y[i] = s / l[(i, i)].re;
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[(k, i)].conj() * y[k];
        }
        y[i] = s / l[(i, i)].re;
    }
    y
}

/// Inverse of a Hermitian positive-definite matrix via its Cholesky factor.
/// The result is exactly Hermitian.
pub fn hpd_inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let l = cholesky(a)?;
    let n = l.rows;
    // Linv = L^{-1}; row i is (e_i − Σ_{k<i} L[i,k]·Linv[k,:]) / L[i,i].
    let mut linv = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let (done, rest) = linv.data.split_at_mut(i * n);
        let row = &mut rest[..n];
        row[i] = Complex64::new(1.0, 0.0);
        for (k, &lik) in l.row(i)[..i].iter().enumerate() {
            let src = &done[k * n..k * n + k + 1];
            for (r, s) in row[..=k].iter_mut().zip(src) {
                *r -= lik * s;
            }
        }
        let d = 1.0 / l[(i, i)].re;
        for r in row[..=i].iter_mut() {
            *r *= d;
        }
    }
    // A^{-1} = Linv^H Linv; entry (i, j) = sum_{k >= max(i,j)} conj(Linv[k,i]) Linv[k,j].
    let mut inv = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let row = linv.row(k);
        for i in 0..=k {
            let a = row[i].conj();
            let out = &mut inv.data[i * n..i * n + k + 1];
            for (o, b) in out[..=i].iter_mut().zip(&row[..=i]) {
                *o += a * b;
            }
        }
    }
    for i in 0..n {
        inv.data[i * n + i].im = 0.0;
        for j in 0..i {
            let v = inv.data[i * n + j];
            inv.data[j * n + i] = v.conj();
        }
    }
    Ok(inv)
}

/// Inverse of a general square matrix by Gauss-Jordan elimination with
/// partial pivoting.
pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::InvalidDimension(format!(
            "inverse needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    let n = a.rows;
    let mut m = a.clone();
    let mut inv = ComplexMatrix::identity(n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[(x, col)].norm().total_cmp(&m[(y, col)].norm()))
            .unwrap();
        if m[(pivot, col)].norm() == 0.0 {
            return Err(Error::NotPositiveDefinite);
        }
        if pivot != col {
            for c in 0..n {
                m.data.swap(pivot * n + c, col * n + c);
                inv.data.swap(pivot * n + c, col * n + c);
            }
        }
        let p = m[(col, col)].inv();
        for c in 0..n {
            m[(col, c)] *= p;
            inv[(col, c)] *= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[(r, col)];
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in 0..n {
                let mv = m[(col, c)];
                let iv = inv[(col, c)];
                m[(r, c)] -= f * mv;
                inv[(r, c)] -= f * iv;
            }
        }
    }
    Ok(inv)
}
