//! Tensor-product rectangular grids and cell-centered fields.

use crate::error::{Error, Result};

/// A rectangular tensor-product grid described by its cell edges.
///
/// Cells are indexed row-major with `x` fastest: `cell = iy * nx + ix`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    x_edges: Vec<f64>,
    y_edges: Vec<f64>,
    x_centers: Vec<f64>,
    y_centers: Vec<f64>,
}

fn check_edges(name: &str, e: &[f64]) -> Result<()> {
    if e.len() < 2 {
        return Err(Error::InvalidModel(format!("{name} needs at least 2 edges")));
    }
    if e.iter().any(|v| !v.is_finite()) || e.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidModel(format!("{name} must be finite and strictly increasing")));
    }
    Ok(())
}

fn centers(e: &[f64]) -> Vec<f64> {
    e.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

impl Grid2D {
    pub fn new(x_edges: Vec<f64>, y_edges: Vec<f64>) -> Result<Self> {
        check_edges("x_edges", &x_edges)?;
        check_edges("y_edges", &y_edges)?;
        Ok(Grid2D { x_centers: centers(&x_edges), y_centers: centers(&y_edges), x_edges, y_edges })
    }

    /// Uniform `nx` by `ny` cells over `[x0, x1] x [y0, y1]`.
    pub fn uniform(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<Self> {
        let lin = |a: f64, b: f64, n: usize| -> Vec<f64> { (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect() };
        Grid2D::new(lin(x0, x1, nx), lin(y0, y1, ny))
    }

    pub fn nx(&self) -> usize {
        self.x_centers.len()
    }

    pub fn ny(&self) -> usize {
        self.y_centers.len()
    }

    pub fn cell_count(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn x_edges(&self) -> &[f64] {
        &self.x_edges
    }

    pub fn y_edges(&self) -> &[f64] {
        &self.y_edges
    }

    pub fn x_centers(&self) -> &[f64] {
        &self.x_centers
    }

    pub fn y_centers(&self) -> &[f64] {
        &self.y_centers
    }

    pub fn dx(&self, ix: usize) -> f64 {
        self.x_edges[ix + 1] - self.x_edges[ix]
    }

    pub fn dy(&self, iy: usize) -> f64 {
        self.y_edges[iy + 1] - self.y_edges[iy]
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx() + ix
    }

    #[inline]
    pub fn coords(&self, cell: usize) -> (usize, usize) {
        (cell % self.nx(), cell / self.nx())
    }

    pub fn center(&self, cell: usize) -> [f64; 2] {
        let (ix, iy) = self.coords(cell);
        [self.x_centers[ix], self.y_centers[iy]]
    }

    pub fn area(&self, cell: usize) -> f64 {
        let (ix, iy) = self.coords(cell);
        self.dx(ix) * self.dy(iy)
    }

    pub fn areas(&self) -> Vec<f64> {
        (0..self.cell_count()).map(|c| self.area(c)).collect()
    }

    pub fn min_spacing(&self) -> f64 {
        let mx = (0..self.nx()).map(|i| self.dx(i)).fold(f64::INFINITY, f64::min);
        let my = (0..self.ny()).map(|i| self.dy(i)).fold(f64::INFINITY, f64::min);
        mx.min(my)
    }

    /// `[x_min, x_max, y_min, y_max]`.
    pub fn bounds(&self) -> [f64; 4] {
        [self.x_edges[0], *self.x_edges.last().unwrap(), self.y_edges[0], *self.y_edges.last().unwrap()]
    }

    pub fn diagonal(&self) -> f64 {
        let [x0, x1, y0, y1] = self.bounds();
        (x1 - x0).hypot(y1 - y0)
    }

    /// Cell containing `(x, y)`; points on an interior edge belong to the upper cell.
    pub fn locate(&self, x: f64, y: f64) -> Option<usize> {
        let ix = locate_1d(&self.x_edges, x)?;
        let iy = locate_1d(&self.y_edges, y)?;
        Some(self.index(ix, iy))
    }

    /// Index range of cell centers lying in `[lo, hi]` along x.
    pub fn x_center_range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        center_range(&self.x_centers, lo, hi)
    }

    pub fn y_center_range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        center_range(&self.y_centers, lo, hi)
    }

    /// Sub-grid made of cells `ix0..ix1` by `iy0..iy1`.
    pub fn subgrid(&self, ix: std::ops::Range<usize>, iy: std::ops::Range<usize>) -> Result<Grid2D> {
        Grid2D::new(self.x_edges[ix.start..=ix.end].to_vec(), self.y_edges[iy.start..=iy.end].to_vec())
    }
}

fn locate_1d(edges: &[f64], v: f64) -> Option<usize> {
    let n = edges.len() - 1;
    if !(v >= edges[0] && v <= edges[n]) {
        return None;
    }
    let i = edges.partition_point(|&e| e <= v);
    Some(i.saturating_sub(1).min(n - 1))
}

fn center_range(c: &[f64], lo: f64, hi: f64) -> std::ops::Range<usize> {
    let a = c.partition_point(|&v| v < lo);
    let b = c.partition_point(|&v| v <= hi);
    a..b.max(a)
}

/// Scalar values at the cell centers of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: &Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::GridMismatch { expected: grid.cell_count(), found: values.len() });
        }
        Ok(Field { nx: grid.nx(), ny: grid.ny(), values })
    }

    pub fn constant(grid: &Grid2D, v: f64) -> Self {
        Field { nx: grid.nx(), ny: grid.ny(), values: vec![v; grid.cell_count()] }
    }

    pub fn from_fn(grid: &Grid2D, mut f: impl FnMut(usize) -> f64) -> Self {
        Field { nx: grid.nx(), ny: grid.ny(), values: (0..grid.cell_count()).map(&mut f).collect() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn check_grid(&self, grid: &Grid2D) -> Result<()> {
        if self.nx != grid.nx() || self.ny != grid.ny() {
            return Err(Error::GridMismatch { expected: grid.cell_count(), found: self.values.len() });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl std::ops::Index<usize> for Field {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_edges() {
        assert!(Grid2D::new(vec![0.0], vec![0.0, 1.0]).is_err());
        assert!(Grid2D::new(vec![0.0, 1.0, 1.0], vec![0.0, 1.0]).is_err());
        assert!(Grid2D::new(vec![0.0, f64::NAN], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn geometry() {
        let g = Grid2D::new(vec![0.0, 1.0, 3.0], vec![-1.0, 0.0]).unwrap();
        assert_eq!(g.cell_count(), 2);
        assert_eq!(g.center(1), [2.0, -0.5]);
        assert_eq!(g.area(1), 2.0);
        assert_eq!(g.locate(1.0, -0.5), Some(1));
        assert_eq!(g.locate(3.0, 0.0), Some(1));
        assert_eq!(g.locate(3.1, 0.0), None);
        assert_eq!(g.x_center_range(0.4, 2.5), 0..2);
        assert_eq!(g.x_center_range(0.6, 1.5), 1..1);
    }

    #[test]
    fn field_shape_checked() {
        let g = Grid2D::uniform(0.0, 1.0, 0.0, 1.0, 3, 2).unwrap();
        assert!(Field::new(&g, vec![0.0; 5]).is_err());
        let f = Field::constant(&g, 1.0);
        let h = Grid2D::uniform(0.0, 1.0, 0.0, 1.0, 2, 3).unwrap();
        assert!(f.check_grid(&h).is_err());
        assert!(f.check_grid(&g).is_ok());
    }
}
