//! Forward models: the physics that maps a property image to measurements.
//!
//! Every model works on its own inversion grid and returns the residual
//! `M(p) - u` together with a pixel sensitivity matrix `S` whose product with
//! a pixel perturbation is the first-order change of the residual. Entries of
//! `S` already include the cell area.

mod banded;
pub mod ct;
pub mod dot;
pub mod ert;
mod fv;
mod sparse;

pub use banded::{BandLdl, BandMatrix, BandScalar};
pub use sparse::CscMatrix;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid2D};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Measurement vector, laid out in experiment-major blocks.
#[derive(Debug, Clone, PartialEq)]
pub enum DataVector {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl DataVector {
    pub fn len(&self) -> usize {
        match self {
            DataVector::Real(v) => v.len(),
            DataVector::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, DataVector::Complex(_))
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        match self {
            DataVector::Real(v) => v.iter().map(|x| x * x).sum(),
            DataVector::Complex(v) => v.iter().map(|x| x.norm_sqr()).sum(),
        }
    }

    /// Real view used by the optimizer: complex entries become interleaved `(re, im)` pairs,
    /// so the real dot product equals `Re <a, b>`.
    pub fn to_stacked(&self) -> Vec<f64> {
        match self {
            DataVector::Real(v) => v.clone(),
            DataVector::Complex(v) => v.iter().flat_map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        match self {
            DataVector::Real(v) => v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            DataVector::Complex(v) => v.clone(),
        }
    }

    fn zip_with(&self, other: &DataVector, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<DataVector> {
        if self.len() != other.len() {
            return Err(Error::DataMismatch { expected: self.len(), found: other.len() });
        }
        Ok(match (self, other) {
            (DataVector::Real(a), DataVector::Real(b)) => {
                DataVector::Real(a.iter().zip(b).map(|(&x, &y)| f(Complex64::new(x, 0.0), Complex64::new(y, 0.0)).re).collect())
            }
            _ => DataVector::Complex(self.to_complex().into_iter().zip(other.to_complex()).map(|(x, y)| f(x, y)).collect()),
        })
    }

    pub fn sub(&self, other: &DataVector) -> Result<DataVector> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &DataVector) -> Result<DataVector> {
        self.zip_with(other, |a, b| a + b)
    }
}

/// Pixel sensitivity matrix: rows are measurements, columns are inversion cells.
#[derive(Debug, Clone)]
pub enum SensitivityMatrix {
    Sparse(CscMatrix),
    Dense(DMatrix<f64>),
    DenseComplex(DMatrix<Complex64>),
}

impl SensitivityMatrix {
    pub fn nrows(&self) -> usize {
        match self {
            SensitivityMatrix::Sparse(m) => m.nrows(),
            SensitivityMatrix::Dense(m) => m.nrows(),
            SensitivityMatrix::DenseComplex(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            SensitivityMatrix::Sparse(m) => m.ncols(),
            SensitivityMatrix::Dense(m) => m.ncols(),
            SensitivityMatrix::DenseComplex(m) => m.ncols(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, SensitivityMatrix::DenseComplex(_))
    }

    /// Length of the real stacked view of a column.
    pub fn stacked_rows(&self) -> usize {
        if self.is_complex() {
            2 * self.nrows()
        } else {
            self.nrows()
        }
    }

    /// `S v` for a real pixel perturbation.
    pub fn apply(&self, v: &[f64]) -> DataVector {
        match self {
            SensitivityMatrix::Sparse(m) => DataVector::Real(m.mul_vec(v)),
            SensitivityMatrix::Dense(m) => DataVector::Real((m * nalgebra::DVector::from_column_slice(v)).data.into()),
            SensitivityMatrix::DenseComplex(m) => {
                let vc = nalgebra::DVector::from_iterator(v.len(), v.iter().map(|&x| Complex64::new(x, 0.0)));
                DataVector::Complex((m * vc).data.into())
            }
        }
    }

    /// `S v` for a complex pixel vector.
    pub fn apply_complex(&self, v: &[Complex64]) -> Vec<Complex64> {
        match self {
            SensitivityMatrix::Sparse(m) => m.mul_vec_complex(v),
            SensitivityMatrix::Dense(m) => {
                let mc = m.map(|x| Complex64::new(x, 0.0));
                (mc * nalgebra::DVector::from_column_slice(v)).data.into()
            }
            SensitivityMatrix::DenseComplex(m) => (m * nalgebra::DVector::from_column_slice(v)).data.into(),
        }
    }

    /// `S^H w`.
    pub fn adjoint_complex(&self, w: &[Complex64]) -> Vec<Complex64> {
        match self {
            SensitivityMatrix::Sparse(m) => {
                let wc: Vec<Complex64> = w.iter().map(|z| z.conj()).collect();
                m.tr_mul_vec_complex(&wc).into_iter().map(|z| z.conj()).collect()
            }
            SensitivityMatrix::Dense(m) => {
                let mc = m.map(|x| Complex64::new(x, 0.0));
                mc.ad_mul(&nalgebra::DVector::from_column_slice(w)).data.into()
            }
            SensitivityMatrix::DenseComplex(m) => m.ad_mul(&nalgebra::DVector::from_column_slice(w)).data.into(),
        }
    }

    /// `out += weight * (stacked column c)`.
    pub fn axpy_stacked_column(&self, c: usize, weight: f64, out: &mut [f64]) {
        match self {
            SensitivityMatrix::Sparse(m) => {
                let (rows, vals) = m.col(c);
                for (&r, &v) in rows.iter().zip(vals) {
                    out[r] += weight * v;
                }
            }
            SensitivityMatrix::Dense(m) => {
                let n = m.nrows();
                let col = &m.as_slice()[c * n..(c + 1) * n];
                for (o, &v) in out.iter_mut().zip(col) {
                    *o += weight * v;
                }
            }
            SensitivityMatrix::DenseComplex(m) => {
                let n = m.nrows();
                let col = &m.as_slice()[c * n..(c + 1) * n];
                for (o, v) in out.chunks_exact_mut(2).zip(col) {
                    o[0] += weight * v.re;
                    o[1] += weight * v.im;
                }
            }
        }
    }
}

/// Physics that maps a property image on [`ForwardModel::grid`] to data.
pub trait ForwardModel: Send + Sync {
    /// Inversion grid on which property images live.
    fn grid(&self) -> &Grid2D;

    /// Data entries per experiment block.
    fn block_sizes(&self) -> Vec<usize>;

    fn data_len(&self) -> usize {
        self.block_sizes().iter().sum()
    }

    fn is_complex(&self) -> bool;

    /// `M(p)`.
    fn forward(&self, p: &Field) -> Result<DataVector>;

    /// `M(p) - u`.
    fn residual(&self, p: &Field, data: &DataVector) -> Result<DataVector> {
        if data.len() != self.data_len() {
            return Err(Error::DataMismatch { expected: self.data_len(), found: data.len() });
        }
        self.forward(p)?.sub(data)
    }

    fn sensitivity(&self, p: &Field) -> Result<SensitivityMatrix>;

    /// Residual and sensitivity together; models with expensive solves share work here.
    fn linearize(&self, p: &Field, data: &DataVector) -> Result<(DataVector, SensitivityMatrix)> {
        Ok((self.residual(p, data)?, self.sensitivity(p)?))
    }
}
