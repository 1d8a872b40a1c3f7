use super::heaviside::{Heaviside, HeavisideKind};
use crate::csrbf::WendlandKernel;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One CSRBF term `alpha * psi(||beta (x - center)||_dag)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub weight: f64,
    pub dilation: f64,
    pub center: [f64; 2],
}

/// Identifies one scalar PaLS parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamIndex {
    Weight(usize),
    Dilation(usize),
    Center(usize, usize),
    ContrastIn,
    ContrastOut,
}

impl ParamIndex {
    pub fn bump(&self) -> Option<usize> {
        match *self {
            ParamIndex::Weight(j) | ParamIndex::Dilation(j) | ParamIndex::Center(j, _) => Some(j),
            _ => None,
        }
    }

    /// Position in the flat vector
    /// `[weights, dilations, c_1x, c_1y, .., c_mx, c_my, p_in, p_out]`.
    pub fn flat(&self, bumps: usize) -> usize {
        match *self {
            ParamIndex::Weight(j) => j,
            ParamIndex::Dilation(j) => bumps + j,
            ParamIndex::Center(j, a) => 2 * bumps + 2 * j + a,
            ParamIndex::ContrastIn => 4 * bumps,
            ParamIndex::ContrastOut => 4 * bumps + 1,
        }
    }

    pub fn from_flat(i: usize, bumps: usize) -> Option<ParamIndex> {
        let m = bumps;
        Some(match i {
            i if i < m => ParamIndex::Weight(i),
            i if i < 2 * m => ParamIndex::Dilation(i - m),
            i if i < 4 * m => ParamIndex::Center((i - 2 * m) / 2, (i - 2 * m) % 2),
            i if i == 4 * m => ParamIndex::ContrastIn,
            i if i == 4 * m + 1 => ParamIndex::ContrastOut,
            _ => return None,
        })
    }

    /// The four shape parameters of bump `j`, in flat order.
    pub fn of_bump(j: usize) -> [ParamIndex; 4] {
        [ParamIndex::Weight(j), ParamIndex::Dilation(j), ParamIndex::Center(j, 0), ParamIndex::Center(j, 1)]
    }
}

/// Complete parametric level set state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PalsModel {
    pub bumps: Vec<Bump>,
    pub contrast_in: f64,
    pub contrast_out: f64,
    /// Level `c` whose superlevel set is the shape.
    pub level: f64,
    pub heaviside: Heaviside,
    /// `upsilon` in the smoothed norm `sqrt(|v|^2 + upsilon^2)`.
    pub norm_smoothing: f64,
    pub kernel: WendlandKernel,
    /// Lower bound on `|dilation|`.
    pub min_dilation: f64,
}

impl PalsModel {
    pub fn bump_count(&self) -> usize {
        self.bumps.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModel(m));
        if self.bumps.is_empty() {
            return bad("at least one bump is required".into());
        }
        if !(self.heaviside.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.heaviside.epsilon));
        }
        if self.heaviside.kind == HeavisideKind::H2 && self.level.abs() < self.heaviside.epsilon {
            return bad(format!(
                "H2 requires |c| >= epsilon so that phi <= 0 maps to the outside value (c = {}, epsilon = {})",
                self.level, self.heaviside.epsilon
            ));
        }
        if self.norm_smoothing == 0.0 || !self.norm_smoothing.is_finite() {
            return bad("norm smoothing must be finite and nonzero".into());
        }
        if !(self.min_dilation > 0.0) {
            return bad("minimum dilation must be positive".into());
        }
        for (j, b) in self.bumps.iter().enumerate() {
            if b.dilation.abs() < self.min_dilation {
                return bad(format!("bump {j}: |dilation| {} below minimum {}", b.dilation.abs(), self.min_dilation));
            }
            if !(b.weight.is_finite() && b.center.iter().all(|c| c.is_finite())) {
                return bad(format!("bump {j} has non-finite parameters"));
            }
        }
        Ok(())
    }

    pub fn param_count(&self, with_contrasts: bool) -> usize {
        4 * self.bump_count() + if with_contrasts { 2 } else { 0 }
    }

    pub fn get(&self, idx: ParamIndex) -> f64 {
        match idx {
            ParamIndex::Weight(j) => self.bumps[j].weight,
            ParamIndex::Dilation(j) => self.bumps[j].dilation,
            ParamIndex::Center(j, a) => self.bumps[j].center[a],
            ParamIndex::ContrastIn => self.contrast_in,
            ParamIndex::ContrastOut => self.contrast_out,
        }
    }

    pub fn set(&mut self, idx: ParamIndex, v: f64) {
        match idx {
            ParamIndex::Weight(j) => self.bumps[j].weight = v,
            ParamIndex::Dilation(j) => self.bumps[j].dilation = v,
            ParamIndex::Center(j, a) => self.bumps[j].center[a] = v,
            ParamIndex::ContrastIn => self.contrast_in = v,
            ParamIndex::ContrastOut => self.contrast_out = v,
        }
    }

    /// Flat parameter vector.
    pub fn params(&self, with_contrasts: bool) -> Vec<f64> {
        let m = self.bump_count();
        (0..self.param_count(with_contrasts)).map(|i| self.get(ParamIndex::from_flat(i, m).unwrap())).collect()
    }

    /// Keeps the sign of every dilation but raises its magnitude to `min_dilation`.
    pub fn clamp_dilations(&mut self) {
        let lo = self.min_dilation;
        for b in &mut self.bumps {
            if b.dilation.abs() < lo {
                b.dilation = if b.dilation < 0.0 { -lo } else { lo };
            }
        }
    }

    /// Lower dilation bound for a domain: bump supports never exceed 20 domain diagonals.
    pub fn default_min_dilation(domain_diagonal: f64) -> f64 {
        1.0 / (20.0 * domain_diagonal)
    }
}
