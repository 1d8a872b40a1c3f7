//! Piecewise-constant phantoms built from discs and polygons.
//!
//! A cell belongs to a shape when its center does. Shapes are applied in
//! order: `add` unions a primitive into the region, `subtract` removes it.

use super::config::{PhantomConfig, ShapeConfig, ShapeOp};
use crate::grid::{Field, Grid2D};
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Even-odd point-in-polygon test.
pub fn point_in_polygon(p: [f64; 2], vertices: &[[f64; 2]]) -> bool {
    let mut inside = false;
    let n = vertices.len();
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

impl ShapeConfig {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            ShapeConfig::Disc { center, radius, .. } => (p[0] - center[0]).hypot(p[1] - center[1]) <= *radius,
            ShapeConfig::Polygon { vertices, .. } => point_in_polygon(p, vertices),
        }
    }

    pub fn op(&self) -> ShapeOp {
        match self {
            ShapeConfig::Disc { op, .. } | ShapeConfig::Polygon { op, .. } => *op,
        }
    }
}

/// Whether a point lies in the composite region.
pub fn region_contains(shapes: &[ShapeConfig], p: [f64; 2]) -> bool {
    let mut inside = false;
    for s in shapes {
        if s.contains(p) {
            inside = s.op() == ShapeOp::Add;
        }
    }
    inside
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub mask: Vec<bool>,
    /// Binary property image.
    pub truth: Field,
    pub inside: f64,
    pub outside: f64,
}

impl Phantom {
    pub fn rasterize(config: &PhantomConfig, grid: &Grid2D) -> Phantom {
        let mask: Vec<bool> = (0..grid.cell_count()).map(|c| region_contains(&config.shapes, grid.center(c))).collect();
        let truth = Field::from_fn(grid, |c| if mask[c] { config.inside } else { config.outside });
        Phantom { mask, truth, inside: config.inside, outside: config.outside }
    }

    /// Truth plus i.i.d. Gaussian noise with std `percent / 100` times the mean value.
    pub fn heterogeneous(&self, percent: f64, rng: &mut impl Rng) -> Field {
        let mut f = self.truth.clone();
        if percent == 0.0 {
            return f;
        }
        let mean = f.values().iter().sum::<f64>() / f.len() as f64;
        let normal = Normal::new(0.0, percent / 100.0 * mean.abs()).expect("finite std");
        for v in f.values_mut() {
            *v += normal.sample(rng);
        }
        f
    }

    pub fn inside_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn disc(c: [f64; 2], r: f64, op: ShapeOp) -> ShapeConfig {
        ShapeConfig::Disc { center: c, radius: r, op }
    }

    #[test]
    fn polygon_membership() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!(point_in_polygon([0.5, 0.5], &sq));
        assert!(!point_in_polygon([1.5, 0.5], &sq));
        let l = [[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]];
        assert!(point_in_polygon([0.5, 1.5], &l));
        assert!(!point_in_polygon([1.5, 1.5], &l));
    }

    #[test]
    fn subtract_makes_a_hole() {
        let shapes = vec![disc([0.0, 0.0], 0.5, ShapeOp::Add), disc([0.0, 0.0], 0.2, ShapeOp::Subtract)];
        assert!(!region_contains(&shapes, [0.0, 0.0]));
        assert!(region_contains(&shapes, [0.3, 0.0]));
        assert!(!region_contains(&shapes, [0.6, 0.0]));
    }

    #[test]
    fn rasterized_disc_area() {
        let g = Grid2D::uniform(-1.0, 1.0, -1.0, 1.0, 200, 200).unwrap();
        let cfg =
            PhantomConfig { inside: 2.0, outside: 1.0, heterogeneity_percent: 0.0, shapes: vec![disc([0.1, -0.2], 0.5, ShapeOp::Add)] };
        let ph = Phantom::rasterize(&cfg, &g);
        let area = ph.inside_count() as f64 * g.area(0);
        assert!((area - std::f64::consts::PI * 0.25).abs() < 0.01);
        assert!(ph.truth.values().iter().all(|&v| v == 1.0 || v == 2.0));
    }

    #[test]
    fn heterogeneity_is_seeded_and_scaled() {
        let g = Grid2D::uniform(0.0, 1.0, 0.0, 1.0, 50, 50).unwrap();
        let cfg =
            PhantomConfig { inside: 3.0, outside: 1.0, heterogeneity_percent: 2.0, shapes: vec![disc([0.5, 0.5], 0.2, ShapeOp::Add)] };
        let ph = Phantom::rasterize(&cfg, &g);
        let a = ph.heterogeneous(2.0, &mut ChaCha8Rng::seed_from_u64(3));
        let b = ph.heterogeneous(2.0, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
        let mean = ph.truth.values().iter().sum::<f64>() / 2500.0;
        let dev: Vec<f64> = a.values().iter().zip(ph.truth.values()).map(|(x, y)| x - y).collect();
        let std = (dev.iter().map(|d| d * d).sum::<f64>() / 2500.0).sqrt();
        assert!((std / (0.02 * mean) - 1.0).abs() < 0.1);
        assert_eq!(ph.heterogeneous(0.0, &mut ChaCha8Rng::seed_from_u64(3)), ph.truth);
    }
}
