//! Parametric level set function, property map, and analytic sensitivities.
//!
//! The level set function is a sum of dilated, translated Wendland bumps
//!
//! ```text
//! phi(x) = sum_j alpha_j psi(||beta_j (x - chi_j)||_dag),   ||v||_dag = sqrt(|v|^2 + upsilon^2)
//! ```
//!
//! and the property image is `p = p_in H(phi - c) + p_out (1 - H(phi - c))`.
//! All derivative fields returned here are supported inside the owning bump's
//! support disk, which is what makes narrow-band freezing exact.

mod heaviside;
mod model;

pub use heaviside::{Heaviside, HeavisideKind};
pub use model::{Bump, PalsModel, ParamIndex};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid2D};

/// Per-cell derivative data for one bump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpSample {
    pub cell: usize,
    /// `psi(r)`
    pub psi: f64,
    /// `d phi / d (weight, dilation, center_x, center_y)`
    pub grad: [f64; 4],
}

/// Visits every cell whose center lies strictly inside the support of bump `j`,
/// passing the cell index, the offset `x - chi`, and the smoothed scaled radius `r`.
fn for_each_support_cell(model: &PalsModel, grid: &Grid2D, j: usize, mut f: impl FnMut(usize, [f64; 2], f64)) {
    let b = &model.bumps[j];
    let beta2 = b.dilation * b.dilation;
    let u2 = model.norm_smoothing * model.norm_smoothing;
    if u2 >= 1.0 {
        return;
    }
    let reach = ((1.0 - u2) / beta2).sqrt();
    let xs = grid.x_center_range(b.center[0] - reach, b.center[0] + reach);
    let ys = grid.y_center_range(b.center[1] - reach, b.center[1] + reach);
    let xc = grid.x_centers();
    let yc = grid.y_centers();
    for iy in ys {
        let dy = yc[iy] - b.center[1];
        for ix in xs.clone() {
            let dx = xc[ix] - b.center[0];
            let r = (beta2 * (dx * dx + dy * dy) + u2).sqrt();
            if r < 1.0 {
                f(grid.index(ix, iy), [dx, dy], r);
            }
        }
    }
}

/// Cells in the support of bump `j`.
pub fn support_cells(model: &PalsModel, grid: &Grid2D, j: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for_each_support_cell(model, grid, j, |c, _, _| out.push(c));
    out
}

/// `phi` at every cell center.
pub fn eval_phi(model: &PalsModel, grid: &Grid2D) -> Field {
    let mut phi = vec![0.0; grid.cell_count()];
    for j in 0..model.bump_count() {
        let a = model.bumps[j].weight;
        for_each_support_cell(model, grid, j, |c, _, r| phi[c] += a * model.kernel.eval(r));
    }
    Field::new(grid, phi).unwrap()
}

/// Sparse derivatives of `phi` with respect to the four parameters of bump `j`.
pub fn bump_samples(model: &PalsModel, grid: &Grid2D, j: usize) -> Vec<BumpSample> {
    let b = model.bumps[j];
    let mut out = Vec::new();
    for_each_support_cell(model, grid, j, |cell, d, r| {
        let psi = model.kernel.eval(r);
        let dpsi = model.kernel.eval_deriv(r);
        let d2 = d[0] * d[0] + d[1] * d[1];
        let s = b.weight * dpsi / r;
        let beta2 = b.dilation * b.dilation;
        out.push(BumpSample { cell, psi, grad: [psi, s * b.dilation * d2, -s * beta2 * d[0], -s * beta2 * d[1]] });
    });
    out
}

/// Dense `d phi / d mu` for a shape parameter.
pub fn eval_phi_sensitivity(model: &PalsModel, grid: &Grid2D, idx: ParamIndex) -> Result<Field> {
    let (j, k) = match idx {
        ParamIndex::Weight(j) => (j, 0),
        ParamIndex::Dilation(j) => (j, 1),
        ParamIndex::Center(j, a) => (j, 2 + a),
        ParamIndex::ContrastIn => return Err(Error::NotAShapeParameter("contrast_in")),
        ParamIndex::ContrastOut => return Err(Error::NotAShapeParameter("contrast_out")),
    };
    let mut out = vec![0.0; grid.cell_count()];
    for s in bump_samples(model, grid, j) {
        out[s.cell] = s.grad[k];
    }
    Field::new(grid, out)
}

pub fn heaviside(model: &PalsModel, t: f64) -> f64 {
    model.heaviside.eval(t)
}

pub fn delta(model: &PalsModel, t: f64) -> f64 {
    model.heaviside.delta(t)
}

/// Property image given precomputed `phi`.
pub fn property_from_phi(model: &PalsModel, phi: &Field) -> Field {
    let mut p = phi.clone();
    let (pi, po, c) = (model.contrast_in, model.contrast_out, model.level);
    for v in p.values_mut() {
        let h = model.heaviside.eval(*v - c);
        *v = po + (pi - po) * h;
    }
    p
}

pub fn property_map(model: &PalsModel, grid: &Grid2D) -> Field {
    property_from_phi(model, &eval_phi(model, grid))
}

/// Dense `d p / d mu` for any parameter, contrasts included.
pub fn property_sensitivity(model: &PalsModel, grid: &Grid2D, idx: ParamIndex) -> Field {
    let phi = eval_phi(model, grid);
    let c = model.level;
    match idx {
        ParamIndex::ContrastIn => Field::from_fn(grid, |i| model.heaviside.eval(phi[i] - c)),
        ParamIndex::ContrastOut => Field::from_fn(grid, |i| 1.0 - model.heaviside.eval(phi[i] - c)),
        _ => {
            let dphi = eval_phi_sensitivity(model, grid, idx).unwrap();
            let jump = model.contrast_in - model.contrast_out;
            Field::from_fn(grid, |i| jump * model.heaviside.delta(phi[i] - c) * dphi[i])
        }
    }
}

/// Bumps whose support meets the band where `delta(phi - c)` is nonzero.
///
/// Parameters of the remaining bumps receive identically zero gradient and
/// Hessian rows, so they cannot move in the current iteration.
pub fn active_bumps(model: &PalsModel, grid: &Grid2D) -> Vec<usize> {
    active_bumps_from_phi(model, grid, &eval_phi(model, grid))
}

pub fn active_bumps_from_phi(model: &PalsModel, grid: &Grid2D, phi: &Field) -> Vec<usize> {
    if !model.heaviside.is_compact() {
        return (0..model.bump_count()).collect();
    }
    let c = model.level;
    (0..model.bump_count())
        .filter(|&j| {
            let mut hit = false;
            for_each_support_cell(model, grid, j, |cell, _, _| {
                hit |= model.heaviside.in_band(phi[cell] - c);
            });
            hit
        })
        .collect()
}

/// Cells with `phi >= c`.
pub fn superlevel_mask(model: &PalsModel, grid: &Grid2D) -> Vec<bool> {
    let phi = eval_phi(model, grid);
    phi.values().iter().map(|&v| v >= model.level).collect()
}
