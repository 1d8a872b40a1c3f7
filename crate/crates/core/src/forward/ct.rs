//! Parallel-beam monoenergetic X-ray CT.
//!
//! Each measurement is the line integral of attenuation along one ray,
//! computed from exact ray/cell intersection lengths, so the model is an
//! explicit sparse linear operator.

use super::{CscMatrix, DataVector, ForwardModel, SensitivityMatrix};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid2D};
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct CtGeometry {
    /// `[x_min, x_max, y_min, y_max]`; the detector array spans the larger side.
    pub domain: [f64; 4],
    pub n_detectors: usize,
    /// Projection angles in radians.
    pub angles: Vec<f64>,
}

impl CtGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.angles.is_empty() {
            return Err(Error::InvalidModel("CT needs at least one angle".into()));
        }
        if self.n_detectors < 2 {
            return Err(Error::InvalidModel("CT needs at least two detectors".into()));
        }
        Ok(())
    }

    /// Angles `start, start + step, ..` up to and including `stop`, in degrees.
    pub fn degree_range(start: f64, stop: f64, step: f64) -> Vec<f64> {
        let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| (start + i as f64 * step).to_radians()).collect()
    }

    pub fn ray_count(&self) -> usize {
        self.angles.len() * self.n_detectors
    }

    /// Point on the ray and unit direction for detector `k` at angle index `a`.
    pub fn ray(&self, a: usize, k: usize) -> ([f64; 2], [f64; 2]) {
        let [x0, x1, y0, y1] = self.domain;
        let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
        let width = (x1 - x0).max(y1 - y0);
        let s = -0.5 * width + (k as f64 + 0.5) * width / self.n_detectors as f64;
        let (sin, cos) = self.angles[a].sin_cos();
        ([cx + s * cos, cy + s * sin], [-sin, cos])
    }
}

/// Intersection lengths of the line `p + t d` with the cells of `grid`.
pub fn trace_ray(grid: &Grid2D, p: [f64; 2], d: [f64; 2]) -> Vec<(usize, f64)> {
    let [x0, x1, y0, y1] = grid.bounds();
    let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
    for (lo, hi, pk, dk) in [(x0, x1, p[0], d[0]), (y0, y1, p[1], d[1])] {
        if dk.abs() < 1e-15 {
            if pk < lo || pk > hi {
                return Vec::new();
            }
        } else {
            let (a, b) = ((lo - pk) / dk, (hi - pk) / dk);
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
    }
    if !(t1 > t0) {
        return Vec::new();
    }
    let mut ts = vec![t0, t1];
    for (edges, pk, dk) in [(grid.x_edges(), p[0], d[0]), (grid.y_edges(), p[1], d[1])] {
        if dk.abs() < 1e-15 {
            continue;
        }
        ts.extend(edges.iter().map(|&e| (e - pk) / dk).filter(|&t| t > t0 && t < t1));
    }
    ts.sort_by(f64::total_cmp);
    let tol = 1e-12 * grid.diagonal();
    let mut out = Vec::new();
    for w in ts.windows(2) {
        let len = w[1] - w[0];
        if len <= tol {
            continue;
        }
        let tm = 0.5 * (w[0] + w[1]);
        if let Some(c) = grid.locate(p[0] + tm * d[0], p[1] + tm * d[1]) {
            out.push((c, len));
        }
    }
    out
}

/// Ray-length matrix `A[ray, cell]`, rays ordered angle-major.
pub fn ct_sensitivity(geom: &CtGeometry, grid: &Grid2D) -> CscMatrix {
    let nd = geom.n_detectors;
    let triplets: Vec<(usize, usize, f64)> = (0..geom.ray_count())
        .into_par_iter()
        .flat_map_iter(|row| {
            let (p, d) = geom.ray(row / nd, row % nd);
            trace_ray(grid, p, d).into_iter().map(move |(c, l)| (row, c, l))
        })
        .collect();
    CscMatrix::from_triplets(geom.ray_count(), grid.cell_count(), triplets)
}

pub fn ct_forward(matrix: &CscMatrix, attenuation: &Field) -> DataVector {
    DataVector::Real(matrix.mul_vec(attenuation.values()))
}

/// CT forward model with its ray matrix assembled once.
#[derive(Debug, Clone)]
pub struct CtModel {
    geometry: CtGeometry,
    grid: Grid2D,
    matrix: CscMatrix,
}

impl CtModel {
    pub fn new(geometry: CtGeometry, grid: Grid2D) -> Result<Self> {
        geometry.validate()?;
        let matrix = ct_sensitivity(&geometry, &grid);
        Ok(CtModel { geometry, grid, matrix })
    }

    pub fn geometry(&self) -> &CtGeometry {
        &self.geometry
    }

    pub fn matrix(&self) -> &CscMatrix {
        &self.matrix
    }
}

impl ForwardModel for CtModel {
    fn grid(&self) -> &Grid2D {
        &self.grid
    }

    fn block_sizes(&self) -> Vec<usize> {
        vec![self.geometry.n_detectors; self.geometry.angles.len()]
    }

    fn is_complex(&self) -> bool {
        false
    }

    fn forward(&self, p: &Field) -> Result<DataVector> {
        p.check_grid(&self.grid)?;
        Ok(ct_forward(&self.matrix, p))
    }

    fn sensitivity(&self, p: &Field) -> Result<SensitivityMatrix> {
        p.check_grid(&self.grid)?;
        Ok(SensitivityMatrix::Sparse(self.matrix.clone()))
    }
}
