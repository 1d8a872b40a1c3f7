//! DC electrical resistance tomography.
//!
//! Solves `div(sigma grad u) = s` on a rectangle with a zero-flux top surface
//! and zero potential on the sides and bottom. Sources are point currents
//! scaled by the inverse cell area; a dipole is the superposition of two
//! opposite monopoles, so every datum is a difference of monopole fields
//! sampled at sensor cells. Only the cells of the imaging region are
//! inverted; the rest of the domain keeps the background conductivity.
//!
//! Sensitivities are the exact derivative of the discrete data: for a
//! datum `e_i^T u_l`, `d/d sigma_c = sum_f dT_f/dsigma_c [u_l]_f [u_i]_f`, the
//! face-wise form of `int dsigma grad u_l . grad u_i`.

use super::fv::{self, Boundary, Face, Sides};
use super::{BandLdl, DataVector, ForwardModel, SensitivityMatrix};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid2D};
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::ops::Range;

/// Geometry and acquisition scheme of an ERT survey.
#[derive(Debug, Clone)]
pub struct ErtSetup {
    /// Full modelling grid.
    pub grid: Grid2D,
    /// Cell ranges of the imaging region.
    pub region_x: Range<usize>,
    pub region_y: Range<usize>,
    /// Sensor locations.
    pub sensors: Vec<[f64; 2]>,
    /// `(positive electrode, negative electrode)` sensor indices per experiment.
    pub experiments: Vec<(usize, usize)>,
    /// Conductivity outside the imaging region.
    pub background: f64,
}

/// Edges of `n` cells growing linearly away from `start` over `length`
/// (negative `length` grows towards smaller coordinates), first step `h0 + d`.
pub fn graded_edges(start: f64, length: f64, n: usize, h0: f64) -> Vec<f64> {
    let total = length.abs();
    let nf = n as f64;
    let d = (total - nf * h0) * 2.0 / (nf * (nf + 1.0));
    let sign = length.signum();
    let mut e = vec![start];
    let mut x = start;
    for k in 1..=n {
        x += sign * (h0 + k as f64 * d);
        e.push(x);
    }
    *e.last_mut().unwrap() = start + length;
    e
}

/// 30 sensors on the top and sides of `[-0.5, 0.5] x [-1, 0]`: ten up the left side,
/// ten left to right along the top, ten down the right side, equally spaced along the path.
pub fn default_sensors() -> Vec<[f64; 2]> {
    // the side sensors sit just outside the imaging region, the top ones just below the surface
    let nudge = 1e-9;
    let mut s = Vec::with_capacity(30);
    for k in 0..10 {
        s.push([-0.5 - nudge, -0.95 + 0.1 * k as f64]);
    }
    for k in 0..10 {
        s.push([-0.45 + 0.1 * k as f64, -nudge]);
    }
    for k in 0..10 {
        s.push([0.5 + nudge, -0.05 - 0.1 * k as f64]);
    }
    s
}

/// 40 dipoles whose electrodes sit on opposite sides of the imaging region.
pub fn default_experiments() -> Vec<(usize, usize)> {
    let (left, top, right) = (0usize, 10usize, 20usize);
    let mut e = Vec::with_capacity(40);
    // left/right at equal depth
    for k in 0..10 {
        e.push((left + k, right + 9 - k));
    }
    // left/right at shifted depth
    for k in 0..10 {
        e.push((left + k, right + (14 - k) % 10));
    }
    // top to the far side, even depths
    for k in 0..10 {
        e.push(if k < 5 { (top + k, right + 9 - 2 * k) } else { (top + k, left + 2 * (9 - k)) });
    }
    // top to the far side, odd depths
    for k in 0..10 {
        e.push(if k < 5 { (top + k, right + 8 - 2 * k) } else { (top + k, left + 2 * (9 - k) + 1) });
    }
    e
}

impl ErtSetup {
    /// Full 125 x 100 survey over `[-3, 3] x [-3, 0]` with a uniform 75 x 75
    /// imaging region `[-0.5, 0.5] x [-1, 0]`.
    pub fn standard(background: f64) -> Result<Self> {
        ErtSetup::with_resolution(75, 25, background)
    }

    /// Same layout with `inner` uniform cells per side of the imaging region
    /// and `outer` graded cells on each exterior side.
    pub fn with_resolution(inner: usize, outer: usize, background: f64) -> Result<Self> {
        let h0 = 1.0 / inner as f64;
        let mut xe: Vec<f64> = graded_edges(-0.5, -2.5, outer, h0).into_iter().rev().collect();
        xe.extend((1..=inner).map(|i| -0.5 + i as f64 * h0));
        xe.extend(graded_edges(0.5, 2.5, outer, h0).into_iter().skip(1));
        let mut ye: Vec<f64> = graded_edges(-1.0, -2.0, outer, h0).into_iter().rev().collect();
        ye.extend((1..=inner).map(|i| -1.0 + i as f64 * h0));
        let grid = Grid2D::new(xe, ye)?;
        let setup = ErtSetup {
            grid,
            region_x: outer..outer + inner,
            region_y: outer..outer + inner,
            sensors: default_sensors(),
            experiments: default_experiments(),
            background,
        };
        setup.validate()?;
        Ok(setup)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModel(m));
        if self.region_x.end > self.grid.nx() || self.region_y.end > self.grid.ny() || self.region_x.is_empty() || self.region_y.is_empty()
        {
            return bad("imaging region outside the grid".into());
        }
        if !(self.background > 0.0) {
            return bad("background conductivity must be positive".into());
        }
        for (i, s) in self.sensors.iter().enumerate() {
            if self.grid.locate(s[0], s[1]).is_none() {
                return bad(format!("sensor {i} lies outside the grid"));
            }
        }
        for (l, &(a, b)) in self.experiments.iter().enumerate() {
            if a == b || a >= self.sensors.len() || b >= self.sensors.len() {
                return bad(format!("experiment {l} needs two distinct sensors"));
            }
        }
        Ok(())
    }

    pub fn sensor_cells(&self) -> Vec<usize> {
        self.sensors.iter().map(|s| self.grid.locate(s[0], s[1]).unwrap()).collect()
    }

    pub fn region_grid(&self) -> Grid2D {
        self.grid.subgrid(self.region_x.clone(), self.region_y.clone()).unwrap()
    }

    /// Full-grid index of every imaging-region cell, in region order.
    pub fn region_cells(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.region_x.len() * self.region_y.len());
        for iy in self.region_y.clone() {
            for ix in self.region_x.clone() {
                out.push(self.grid.index(ix, iy));
            }
        }
        out
    }

    /// Sensors read in experiment `l`: all except the two electrodes.
    pub fn receivers(&self, l: usize) -> impl Iterator<Item = usize> + '_ {
        let (a, b) = self.experiments[l];
        (0..self.sensors.len()).filter(move |&i| i != a && i != b)
    }

    /// Conductivity on the full grid with the imaging region taken from `region`.
    pub fn embed(&self, region: &[f64]) -> Vec<f64> {
        let mut full = vec![self.background; self.grid.cell_count()];
        for (v, c) in region.iter().zip(self.region_cells()) {
            full[c] = *v;
        }
        full
    }

    pub(crate) fn sides() -> Sides {
        Sides { left: Boundary::Dirichlet, right: Boundary::Dirichlet, bottom: Boundary::Dirichlet, top: Boundary::Neumann }
    }
}

/// Factored conductivity operator on a grid.
pub struct ErtOperator {
    faces: Vec<Face>,
    factor: BandLdl<f64>,
}

impl ErtOperator {
    pub fn new(grid: &Grid2D, sigma: &[f64]) -> Result<Self> {
        if let Some(i) = sigma.iter().position(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidModel(format!("conductivity must be positive (cell {i} = {})", sigma[i])));
        }
        let faces = fv::faces(grid, ErtSetup::sides());
        let a = fv::assemble(grid, &faces, sigma, |_| 0.0, |t| t);
        let factor = a.factor_spd()?;
        Ok(ErtOperator { faces, factor })
    }

    /// Potential for point currents `(cell, strength)`.
    pub fn solve_sources(&self, n: usize, sources: &[(usize, f64)]) -> Vec<f64> {
        let mut rhs = vec![0.0; n];
        for &(c, s) in sources {
            rhs[c] -= s;
        }
        self.factor.solve(&rhs)
    }
}

/// Potential on the full grid for the given point sources.
pub fn ert_solve(grid: &Grid2D, sigma: &Field, sources: &[(usize, f64)]) -> Result<Field> {
    sigma.check_grid(grid)?;
    let op = ErtOperator::new(grid, sigma.values())?;
    Field::new(grid, op.solve_sources(grid.cell_count(), sources))
}

/// ERT forward model restricted to its imaging region.
pub struct ErtModel {
    setup: ErtSetup,
    region_grid: Grid2D,
    region_cells: Vec<usize>,
    sensor_cells: Vec<usize>,
    faces_of_cell: Vec<Vec<usize>>,
}

struct Fields {
    op: ErtOperator,
    sigma: Vec<f64>,
    /// Unit monopole field of every sensor.
    monopoles: Vec<Vec<f64>>,
}

impl ErtModel {
    pub fn new(setup: ErtSetup) -> Result<Self> {
        setup.validate()?;
        let region_grid = setup.region_grid();
        let region_cells = setup.region_cells();
        let sensor_cells = setup.sensor_cells();
        let faces = fv::faces(&setup.grid, ErtSetup::sides());
        let faces_of_cell = fv::cell_faces(setup.grid.cell_count(), &faces);
        Ok(ErtModel { setup, region_grid, region_cells, sensor_cells, faces_of_cell })
    }

    pub fn setup(&self) -> &ErtSetup {
        &self.setup
    }

    fn fields(&self, p: &Field) -> Result<Fields> {
        p.check_grid(&self.region_grid)?;
        let sigma = self.setup.embed(p.values());
        let op = ErtOperator::new(&self.setup.grid, &sigma)?;
        let n = self.setup.grid.cell_count();
        let monopoles = self.sensor_cells.par_iter().map(|&c| op.solve_sources(n, &[(c, 1.0)])).collect();
        Ok(Fields { op, sigma, monopoles })
    }

    fn data_from(&self, f: &Fields) -> DataVector {
        let mut d = Vec::with_capacity(self.data_len());
        for (l, &(a, b)) in self.setup.experiments.iter().enumerate() {
            for i in self.setup.receivers(l) {
                let c = self.sensor_cells[i];
                d.push(f.monopoles[a][c] - f.monopoles[b][c]);
            }
        }
        DataVector::Real(d)
    }

    fn sensitivity_from(&self, f: &Fields) -> SensitivityMatrix {
        let faces = &f.op.faces;
        let nrows = self.data_len();
        let mut s = DMatrix::<f64>::zeros(nrows, self.region_cells.len());
        s.as_mut_slice().par_chunks_mut(nrows).zip(self.region_cells.par_iter()).for_each(|(col, &cell)| {
            for &fi in &self.faces_of_cell[cell] {
                let face = &faces[fi];
                let (da, db) = face.d_transmissibility(&f.sigma);
                let w = if face.a == cell { da } else { db };
                let jumps: Vec<f64> = f.monopoles.iter().map(|u| face.jump(u)).collect();
                let mut row = 0;
                for (l, &(a, b)) in self.setup.experiments.iter().enumerate() {
                    let src = w * (jumps[a] - jumps[b]);
                    for i in self.setup.receivers(l) {
                        col[row] += src * jumps[i];
                        row += 1;
                    }
                }
            }
        });
        SensitivityMatrix::Dense(s)
    }
}

impl ForwardModel for ErtModel {
    fn grid(&self) -> &Grid2D {
        &self.region_grid
    }

    fn block_sizes(&self) -> Vec<usize> {
        (0..self.setup.experiments.len()).map(|l| self.setup.receivers(l).count()).collect()
    }

    fn is_complex(&self) -> bool {
        false
    }

    fn forward(&self, p: &Field) -> Result<DataVector> {
        Ok(self.data_from(&self.fields(p)?))
    }

    fn sensitivity(&self, p: &Field) -> Result<SensitivityMatrix> {
        Ok(self.sensitivity_from(&self.fields(p)?))
    }

    fn linearize(&self, p: &Field, data: &DataVector) -> Result<(DataVector, SensitivityMatrix)> {
        if data.len() != self.data_len() {
            return Err(Error::DataMismatch { expected: self.data_len(), found: data.len() });
        }
        let f = self.fields(p)?;
        Ok((self.data_from(&f).sub(data)?, self.sensitivity_from(&f)))
    }
}
