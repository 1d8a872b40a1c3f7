//! Cell-centered five-point finite-volume discretization of `-div(k grad u)`.
//!
//! Interior faces use the harmonic mean of the two cell coefficients;
//! boundary faces close the system with a zero-flux, zero-value or Robin
//! condition. The resulting matrix is symmetric with bandwidth `nx`.

use super::banded::{BandMatrix, BandScalar};
use crate::grid::Grid2D;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Boundary {
    /// `k du/dn = 0`
    Neumann,
    /// `u = 0`
    Dirichlet,
    /// `u + a du/dn = 0`
    Robin(f64),
}

/// Conditions on the four sides of the rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Sides {
    pub left: Boundary,
    pub right: Boundary,
    pub bottom: Boundary,
    pub top: Boundary,
}

impl Sides {
    pub fn all(b: Boundary) -> Self {
        Sides { left: b, right: b, bottom: b, top: b }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Face {
    pub a: usize,
    /// `None` on the domain boundary.
    pub b: Option<usize>,
    pub len: f64,
    /// Distance from the center of `a` (resp. `b`) to the face.
    pub ha: f64,
    pub hb: f64,
    pub bc: Boundary,
}

impl Face {
    pub fn transmissibility(&self, k: &[f64]) -> f64 {
        match (self.b, self.bc) {
            (Some(b), _) => self.len / (self.ha / k[self.a] + self.hb / k[b]),
            (None, Boundary::Dirichlet) => self.len * k[self.a] / self.ha,
            (None, Boundary::Robin(r)) => self.len * k[self.a] / (self.ha + r),
            (None, Boundary::Neumann) => 0.0,
        }
    }

    /// `(dT/dk_a, dT/dk_b)`.
    pub fn d_transmissibility(&self, k: &[f64]) -> (f64, f64) {
        match (self.b, self.bc) {
            (Some(b), _) => {
                let den = self.ha / k[self.a] + self.hb / k[b];
                let f = self.len / (den * den);
                (f * self.ha / (k[self.a] * k[self.a]), f * self.hb / (k[b] * k[b]))
            }
            (None, Boundary::Dirichlet) => (self.len / self.ha, 0.0),
            (None, Boundary::Robin(_)) => unimplemented!("Robin coefficient depends on k"),
            (None, Boundary::Neumann) => (0.0, 0.0),
        }
    }

    /// Difference of `u` across the face (`u_a - u_b`, or `u_a` against a zero boundary value).
    #[inline]
    pub fn jump<T: BandScalar>(&self, u: &[T]) -> T {
        match self.b {
            Some(b) => u[self.a] - u[b],
            None => u[self.a],
        }
    }
}

pub(crate) fn faces(grid: &Grid2D, sides: Sides) -> Vec<Face> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut out = Vec::with_capacity(2 * nx * ny + 2 * (nx + ny));
    for iy in 0..ny {
        let hy = 0.5 * grid.dy(iy);
        for ix in 0..nx {
            let hx = 0.5 * grid.dx(ix);
            let c = grid.index(ix, iy);
            if ix + 1 < nx {
                out.push(Face { a: c, b: Some(c + 1), len: grid.dy(iy), ha: hx, hb: 0.5 * grid.dx(ix + 1), bc: Boundary::Neumann });
            }
            if iy + 1 < ny {
                out.push(Face { a: c, b: Some(c + nx), len: grid.dx(ix), ha: hy, hb: 0.5 * grid.dy(iy + 1), bc: Boundary::Neumann });
            }
            let mut boundary = |bc: Boundary, len: f64, h: f64| {
                if bc != Boundary::Neumann {
                    out.push(Face { a: c, b: None, len, ha: h, hb: 0.0, bc });
                }
            };
            if ix == 0 {
                boundary(sides.left, grid.dy(iy), hx);
            }
            if ix + 1 == nx {
                boundary(sides.right, grid.dy(iy), hx);
            }
            if iy == 0 {
                boundary(sides.bottom, grid.dx(ix), hy);
            }
            if iy + 1 == ny {
                boundary(sides.top, grid.dx(ix), hy);
            }
        }
    }
    out
}

/// Assembles `K + diag(extra)` where `(K u)_c = sum_f T_f (jump of u across f)`.
pub(crate) fn assemble<T: BandScalar>(
    grid: &Grid2D,
    faces: &[Face],
    k: &[f64],
    extra: impl Fn(usize) -> T,
    lift: impl Fn(f64) -> T,
) -> BandMatrix<T> {
    let n = grid.cell_count();
    let mut m = BandMatrix::zeros(n, grid.nx());
    for c in 0..n {
        m.add(c, c, extra(c));
    }
    for f in faces {
        let t = lift(f.transmissibility(k));
        m.add(f.a, f.a, t);
        if let Some(b) = f.b {
            m.add(b, b, t);
            m.add(f.a, b, T::zero() - t);
        }
    }
    m
}

/// Faces adjacent to each cell, as indices into `faces`.
pub(crate) fn cell_faces(n: usize, faces: &[Face]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::with_capacity(4); n];
    for (i, f) in faces.iter().enumerate() {
        out[f.a].push(i);
        if let Some(b) = f.b {
            out[b].push(i);
        }
    }
    out
}
