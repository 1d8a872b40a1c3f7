use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Regularized Heaviside family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeavisideKind {
    /// `1/2 (1 + 2/pi atan(pi t / eps))`, globally supported derivative.
    H1,
    /// `C^2` ramp saturating exactly outside `[-eps, eps]`.
    H2,
}

/// A regularized Heaviside `H_rg` together with its exact derivative `delta_rg`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Heaviside {
    pub kind: HeavisideKind,
    pub epsilon: f64,
}

impl Heaviside {
    pub fn new(kind: HeavisideKind, epsilon: f64) -> Self {
        Heaviside { kind, epsilon }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let eps = self.epsilon;
        match self.kind {
            HeavisideKind::H1 => 0.5 * (1.0 + (2.0 / PI) * (PI * t / eps).atan()),
            HeavisideKind::H2 => {
                if t >= eps {
                    1.0
                } else if t <= -eps {
                    0.0
                } else {
                    0.5 + t / (2.0 * eps) + (PI * t / eps).sin() / (2.0 * PI)
                }
            }
        }
    }

    #[inline]
    pub fn delta(&self, t: f64) -> f64 {
        let eps = self.epsilon;
        match self.kind {
            HeavisideKind::H1 => {
                let s = PI * t / eps;
                1.0 / (eps * (1.0 + s * s))
            }
            HeavisideKind::H2 => {
                if t.abs() >= eps {
                    0.0
                } else {
                    (1.0 + (PI * t / eps).cos()) / (2.0 * eps)
                }
            }
        }
    }

    /// Whether `delta` is nonzero at `t`.
    #[inline]
    pub fn in_band(&self, t: f64) -> bool {
        match self.kind {
            HeavisideKind::H1 => true,
            HeavisideKind::H2 => t.abs() < self.epsilon,
        }
    }

    pub fn is_compact(&self) -> bool {
        self.kind == HeavisideKind::H2
    }
}
