//! Shape agreement between a recovered superlevel set and the true region.

/// Jaccard index `|A & B| / |A | B|` of two cell masks (1 when both are empty).
pub fn jaccard(a: &[bool], b: &[bool]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.iter().zip(b) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// `|A xor B| / |B|`, the mismatched cells relative to the true region `b`.
pub fn symmetric_difference_fraction(a: &[bool], b: &[bool]) -> f64 {
    assert_eq!(a.len(), b.len());
    let diff = a.iter().zip(b).filter(|(x, y)| x != y).count();
    let truth = b.iter().filter(|&&y| y).count();
    if truth == 0 {
        if diff == 0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff as f64 / truth as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeMetrics {
    pub jaccard: f64,
    pub symmetric_difference: f64,
    pub contrast_in: f64,
    pub contrast_out: f64,
}

pub fn shape_metrics(recovered: &[bool], truth: &[bool], contrast_in: f64, contrast_out: f64) -> ShapeMetrics {
    ShapeMetrics {
        jaccard: jaccard(recovered, truth),
        symmetric_difference: symmetric_difference_fraction(recovered, truth),
        contrast_in,
        contrast_out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;

    #[test]
    fn identical_and_disjoint() {
        let a = [true, false, true, false];
        assert_eq!(jaccard(&a, &a), 1.0);
        assert_eq!(symmetric_difference_fraction(&a, &a), 0.0);
        assert_eq!(jaccard(&a, &[false, true, false, true]), 0.0);
        assert_eq!(symmetric_difference_fraction(&a, &[false, true, false, true]), 2.0);
    }

    #[test]
    fn half_overlapping_unit_squares() {
        let g = Grid2D::uniform(0.0, 2.0, 0.0, 1.0, 40, 20).unwrap();
        let a: Vec<bool> = (0..g.cell_count()).map(|c| g.center(c)[0] < 1.0).collect();
        let b: Vec<bool> = (0..g.cell_count()).map(|c| (0.5..1.5).contains(&g.center(c)[0])).collect();
        assert!((jaccard(&a, &b) - 1.0 / 3.0).abs() < 1e-12);
        assert!((symmetric_difference_fraction(&a, &b) - 1.0).abs() < 1e-12);
    }
}
