//! Frequency-domain diffuse optical tomography.
//!
//! Solves `-div(D grad u) + alpha u + i (omega / v) u = s` with the Robin
//! condition `u + 2 D du/dn = 0`, where `D = 1 / (3 mu_s')`. Sources and
//! detectors are point functionals on boundary cells; the unknown is the
//! absorption `alpha`. Lengths are in meters.

use super::fv::{self, Boundary, Face, Sides};
use super::{BandLdl, DataVector, ForwardModel, SensitivityMatrix};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid2D};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

/// Complex cell values of one solve.
type CellValues = Vec<Complex64>;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

#[derive(Debug, Clone)]
pub struct DotSetup {
    pub grid: Grid2D,
    pub sources: Vec<[f64; 2]>,
    pub detectors: Vec<[f64; 2]>,
    /// Modulation frequencies in Hz.
    pub frequencies: Vec<f64>,
    /// Reduced scattering coefficient, 1/m.
    pub reduced_scattering: f64,
    /// Speed of light in the medium, m/s.
    pub light_speed: f64,
}

impl DotSetup {
    /// `[0, side]^2` on an `n x n` grid with `k` sources along the top and `k`
    /// detectors along the bottom, tissue index 1.37.
    pub fn square(side: f64, n: usize, k: usize, frequencies: Vec<f64>, reduced_scattering: f64) -> Result<Self> {
        let grid = Grid2D::uniform(0.0, side, 0.0, side, n, n)?;
        let xs = (0..k).map(|i| (i as f64 + 0.5) * side / k as f64);
        let setup = DotSetup {
            grid,
            sources: xs.clone().map(|x| [x, side]).collect(),
            detectors: xs.map(|x| [x, 0.0]).collect(),
            frequencies,
            reduced_scattering,
            light_speed: SPEED_OF_LIGHT / 1.37,
        };
        setup.validate()?;
        Ok(setup)
    }

    /// 5 cm square, 50 x 50 cells, 8 sources and detectors, DC / 25 MHz / 50 MHz, `mu_s' = 6 /cm`.
    pub fn standard() -> Result<Self> {
        DotSetup::square(0.05, 50, 8, vec![0.0, 25e6, 50e6], 600.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidModel(m.to_string()));
        if !(self.reduced_scattering > 0.0) {
            return bad("reduced scattering must be positive");
        }
        if !(self.light_speed > 0.0) {
            return bad("light speed must be positive");
        }
        if self.frequencies.is_empty() || self.frequencies.iter().any(|f| !(*f >= 0.0) || !f.is_finite()) {
            return bad("frequencies must be finite and nonnegative");
        }
        if self.sources.is_empty() || self.detectors.is_empty() {
            return bad("need at least one source and one detector");
        }
        for p in self.sources.iter().chain(&self.detectors) {
            if self.cell_of(*p).is_none() {
                return bad("source or detector outside the grid");
            }
        }
        Ok(())
    }

    pub fn diffusion(&self) -> f64 {
        1.0 / (3.0 * self.reduced_scattering)
    }

    /// Cell holding a point, with points on the outer boundary assigned to the boundary cell.
    pub fn cell_of(&self, p: [f64; 2]) -> Option<usize> {
        let [x0, x1, y0, y1] = self.grid.bounds();
        if p[0] < x0 || p[0] > x1 || p[1] < y0 || p[1] > y1 {
            return None;
        }
        let ix = self.grid.x_edges().partition_point(|&e| e <= p[0]).clamp(1, self.grid.nx()) - 1;
        let iy = self.grid.y_edges().partition_point(|&e| e <= p[1]).clamp(1, self.grid.ny()) - 1;
        Some(self.grid.index(ix, iy))
    }

    fn sides(&self) -> Sides {
        Sides::all(Boundary::Robin(2.0 * self.diffusion()))
    }
}

/// Factored complex operator for one frequency.
pub struct DotOperator {
    factor: BandLdl<Complex64>,
    n: usize,
}

impl DotOperator {
    pub fn new(setup: &DotSetup, absorption: &[f64], frequency: f64) -> Result<Self> {
        let faces = fv::faces(&setup.grid, setup.sides());
        DotOperator::with_faces(setup, &faces, absorption, frequency)
    }

    fn with_faces(setup: &DotSetup, faces: &[Face], absorption: &[f64], frequency: f64) -> Result<Self> {
        if let Some(i) = absorption.iter().position(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidModel(format!("absorption must be positive (cell {i} = {})", absorption[i])));
        }
        let a = assemble(setup, faces, absorption, frequency);
        Ok(DotOperator { factor: a.factor()?, n: setup.grid.cell_count() })
    }

    /// Field of a unit point source in `cell`.
    pub fn solve_point(&self, cell: usize) -> Vec<Complex64> {
        let mut rhs = vec![Complex64::new(0.0, 0.0); self.n];
        rhs[cell] = Complex64::new(1.0, 0.0);
        self.factor.solve(&rhs)
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        self.factor.solve(rhs)
    }
}

fn assemble(setup: &DotSetup, faces: &[Face], absorption: &[f64], frequency: f64) -> super::BandMatrix<Complex64> {
    let d = vec![setup.diffusion(); setup.grid.cell_count()];
    let k = 2.0 * std::f64::consts::PI * frequency / setup.light_speed;
    let g = &setup.grid;
    fv::assemble(g, faces, &d, |c| Complex64::new(absorption[c], k) * g.area(c), |t| Complex64::new(t, 0.0))
}

/// Assembled system matrix, for inspection.
pub fn dot_matrix(setup: &DotSetup, absorption: &Field, frequency: f64) -> Result<super::BandMatrix<Complex64>> {
    absorption.check_grid(&setup.grid)?;
    let faces = fv::faces(&setup.grid, setup.sides());
    Ok(assemble(setup, &faces, absorption.values(), frequency))
}

/// Complex field of a unit point source at `source` (a cell index).
pub fn dot_solve(setup: &DotSetup, absorption: &Field, source: usize, frequency: f64) -> Result<Vec<Complex64>> {
    absorption.check_grid(&setup.grid)?;
    Ok(DotOperator::new(setup, absorption.values(), frequency)?.solve_point(source))
}

pub struct DotModel {
    setup: DotSetup,
    source_cells: Vec<usize>,
    detector_cells: Vec<usize>,
    faces: Vec<Face>,
}

/// Source and detector fields for every frequency.
struct Fields {
    sources: Vec<Vec<Vec<Complex64>>>,
    detectors: Vec<Vec<Vec<Complex64>>>,
}

impl DotModel {
    pub fn new(setup: DotSetup) -> Result<Self> {
        setup.validate()?;
        let source_cells = setup.sources.iter().map(|&p| setup.cell_of(p).unwrap()).collect();
        let detector_cells = setup.detectors.iter().map(|&p| setup.cell_of(p).unwrap()).collect();
        let faces = fv::faces(&setup.grid, setup.sides());
        Ok(DotModel { setup, source_cells, detector_cells, faces })
    }

    pub fn setup(&self) -> &DotSetup {
        &self.setup
    }

    fn fields(&self, p: &Field, with_detectors: bool) -> Result<Fields> {
        p.check_grid(&self.setup.grid)?;
        let per_freq: Vec<(Vec<CellValues>, Vec<CellValues>)> = self
            .setup
            .frequencies
            .par_iter()
            .map(|&f| {
                let op = DotOperator::with_faces(&self.setup, &self.faces, p.values(), f)?;
                let s = self.source_cells.par_iter().map(|&c| op.solve_point(c)).collect();
                let d = if with_detectors { self.detector_cells.par_iter().map(|&c| op.solve_point(c)).collect() } else { Vec::new() };
                Ok((s, d))
            })
            .collect::<Result<_>>()?;
        let (sources, detectors) = per_freq.into_iter().unzip();
        Ok(Fields { sources, detectors })
    }

    fn data_from(&self, f: &Fields) -> DataVector {
        let mut d = Vec::with_capacity(self.data_len());
        for us in &f.sources {
            for u in us {
                d.extend(self.detector_cells.iter().map(|&c| u[c]));
            }
        }
        DataVector::Complex(d)
    }

    fn sensitivity_from(&self, f: &Fields) -> SensitivityMatrix {
        let g = &self.setup.grid;
        let n = g.cell_count();
        let nrows = self.data_len();
        let mut s = DMatrix::<Complex64>::zeros(nrows, n);
        s.as_mut_slice().par_chunks_mut(nrows).enumerate().for_each(|(c, col)| {
            let area = g.area(c);
            let mut row = 0;
            for (us, ud) in f.sources.iter().zip(&f.detectors) {
                for u in us {
                    for v in ud {
                        col[row] = -u[c] * v[c] * area;
                        row += 1;
                    }
                }
            }
        });
        SensitivityMatrix::DenseComplex(s)
    }
}

impl ForwardModel for DotModel {
    fn grid(&self) -> &Grid2D {
        &self.setup.grid
    }

    fn block_sizes(&self) -> Vec<usize> {
        vec![self.detector_cells.len(); self.setup.frequencies.len() * self.source_cells.len()]
    }

    fn is_complex(&self) -> bool {
        true
    }

    fn forward(&self, p: &Field) -> Result<DataVector> {
        Ok(self.data_from(&self.fields(p, false)?))
    }

    fn sensitivity(&self, p: &Field) -> Result<SensitivityMatrix> {
        Ok(self.sensitivity_from(&self.fields(p, true)?))
    }

    fn linearize(&self, p: &Field, data: &DataVector) -> Result<(DataVector, SensitivityMatrix)> {
        if data.len() != self.data_len() {
            return Err(Error::DataMismatch { expected: self.data_len(), found: data.len() });
        }
        let f = self.fields(p, true)?;
        Ok((self.data_from(&f).sub(data)?, self.sensitivity_from(&f)))
    }
}
