//! Banded symmetric `L D L^T` factorization.
//!
//! Works for real symmetric positive definite matrices and for complex
//! symmetric (not Hermitian) matrices whose real part is positive definite,
//! which covers the five-point operators assembled in this crate. No pivoting.

use crate::error::{Error, Result};
use num_complex::Complex64;
use num_traits::NumAssign;

pub trait BandScalar: Copy + NumAssign + Send + Sync + std::fmt::Debug {
    fn magnitude(self) -> f64;
}

impl BandScalar for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl BandScalar for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Symmetric matrix stored by its lower band: `A[i, j]` for `i - bw <= j <= i`.
#[derive(Debug, Clone)]
pub struct BandMatrix<T> {
    n: usize,
    bw: usize,
    diag: Vec<T>,
    // row-major: lower[i * bw + (j + bw - i)] = A[i, j] for j in i-bw..i
    lower: Vec<T>,
}

impl<T: BandScalar> BandMatrix<T> {
    pub fn zeros(n: usize, bw: usize) -> Self {
        BandMatrix { n, bw, diag: vec![T::zero(); n], lower: vec![T::zero(); n * bw] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Adds `v` to `A[i, j]` (and, implicitly, `A[j, i]`).
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i == j {
            self.diag[i] += v;
        } else {
            assert!(i - j <= self.bw, "entry ({i}, {j}) outside band {}", self.bw);
            self.lower[i * self.bw + (j + self.bw - i)] += v;
        }
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i == j {
            self.diag[i]
        } else if i - j <= self.bw {
            self.lower[i * self.bw + (j + self.bw - i)]
        } else {
            T::zero()
        }
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y: Vec<T> = self.diag.iter().zip(x).map(|(&d, &v)| d * v).collect();
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..i {
                let a = self.lower[i * self.bw + (j + self.bw - i)];
                y[i] += a * x[j];
                y[j] += a * x[i];
            }
        }
        y
    }

    pub fn factor(&self) -> Result<BandLdl<T>> {
        let (n, bw) = (self.n, self.bw);
        let mut l = self.lower.clone();
        let mut d = vec![T::zero(); n];
        // scratch: w[k] = L[i,k] * D[k] for the current row
        let mut w = vec![T::zero(); bw];
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row = i * bw;
            for j in lo..i {
                let mut s = l[row + j + bw - i];
                let klo = lo.max(j.saturating_sub(bw));
                let jrow = j * bw;
                for k in klo..j {
                    s -= w[k + bw - i] * l[jrow + k + bw - j];
                }
                let lij = s / d[j];
                l[row + j + bw - i] = lij;
                w[j + bw - i] = lij * d[j];
            }
            let mut dii = self.diag[i];
            for k in lo..i {
                dii -= w[k + bw - i] * l[row + k + bw - i];
            }
            let scale = self.diag[i].magnitude().max(f64::MIN_POSITIVE);
            if !(dii.magnitude() > 1e-13 * scale) || !dii.magnitude().is_finite() {
                return Err(Error::Solver(format!("zero or non-finite pivot at row {i}")));
            }
            d[i] = dii;
        }
        Ok(BandLdl { n, bw, l, d })
    }
}

impl BandMatrix<f64> {
    /// Symmetric positive definite check via the pivots of `L D L^T`.
    pub fn factor_spd(&self) -> Result<BandLdl<f64>> {
        let f = self.factor()?;
        if let Some(i) = f.d.iter().position(|&v| v <= 0.0) {
            return Err(Error::Solver(format!("matrix is not positive definite (pivot {i})")));
        }
        Ok(f)
    }
}

/// Factors of a banded symmetric matrix.
#[derive(Debug, Clone)]
pub struct BandLdl<T> {
    n: usize,
    bw: usize,
    l: Vec<T>,
    d: Vec<T>,
}

impl<T: BandScalar> BandLdl<T> {
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let (n, bw) = (self.n, self.bw);
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row = i * bw;
            let mut s = x[i];
            for (k, &xk) in x.iter().enumerate().take(i).skip(lo) {
                s -= self.l[row + k + bw - i] * xk;
            }
            x[i] = s;
        }
        for (xi, &di) in x.iter_mut().zip(&self.d) {
            *xi /= di;
        }
        for i in (0..n).rev() {
            let xi = x[i];
            if xi.is_zero() {
                continue;
            }
            let lo = i.saturating_sub(bw);
            let row = i * bw;
            for (k, xk) in x.iter_mut().enumerate().take(i).skip(lo) {
                *xk -= self.l[row + k + bw - i] * xi;
            }
        }
        x
    }

    pub fn pivots(&self) -> &[T] {
        &self.d
    }
}
