//! Derivative self-tests: finite-difference gradient and Jacobian checks and
//! the adjoint identity of a sensitivity matrix.

use crate::error::Result;
use crate::forward::{DataVector, ForwardModel};
use crate::grid::Field;
use crate::optim;
use crate::pals::{self, PalsModel, ParamIndex};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// `0.5 ||R||^2` at a PaLS model.
pub fn cost(fwd: &dyn ForwardModel, model: &PalsModel, data: &DataVector) -> Result<f64> {
    let p = pals::property_map(model, fwd.grid());
    Ok(0.5 * fwd.residual(&p, data)?.norm_sqr())
}

/// Analytic gradient over every parameter (all bumps, plus contrasts when requested).
pub fn analytic_gradient(
    fwd: &dyn ForwardModel,
    model: &PalsModel,
    data: &DataVector,
    contrasts: bool,
) -> Result<(Vec<ParamIndex>, Vec<f64>)> {
    let grid = fwd.grid();
    let phi = pals::eval_phi(model, grid);
    let p = pals::property_from_phi(model, &phi);
    let (r, s) = fwd.linearize(&p, data)?;
    let all: Vec<usize> = (0..model.bump_count()).collect();
    let params = optim::active_parameters(&all, contrasts);
    let j = optim::assemble_jacobian(model, &phi, &s, &params, grid);
    let g = optim::gradient(&j, &r.to_stacked());
    Ok((params, g.iter().copied().collect()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientCheck {
    pub params: Vec<ParamIndex>,
    pub analytic: Vec<f64>,
    pub finite_difference: Vec<f64>,
    /// `max_k |fd_k - g_k| / max(|g_k|, 1e-4 ||g||_inf)`.
    pub max_rel_error: f64,
}

/// Central differences of the cost with step `h * max(|mu_k|, 1)`.
pub fn gradient_check(fwd: &dyn ForwardModel, model: &PalsModel, data: &DataVector, contrasts: bool, h: f64) -> Result<GradientCheck> {
    let (params, analytic) = analytic_gradient(fwd, model, data, contrasts)?;
    let mut fd = Vec::with_capacity(params.len());
    for &idx in &params {
        let v = model.get(idx);
        let step = h * v.abs().max(1.0);
        let mut plus = model.clone();
        plus.set(idx, v + step);
        let mut minus = model.clone();
        minus.set(idx, v - step);
        fd.push((cost(fwd, &plus, data)? - cost(fwd, &minus, data)?) / (2.0 * step));
    }
    let ginf = analytic.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let floor = 1e-4 * ginf;
    let max_rel_error = analytic
        .iter()
        .zip(&fd)
        .map(|(a, f)| {
            let scale = a.abs().max(floor);
            if scale == 0.0 {
                0.0
            } else {
                (a - f).abs() / scale
            }
        })
        .fold(0.0, f64::max);
    Ok(GradientCheck { params, analytic, finite_difference: fd, max_rel_error })
}

fn random_field(fwd: &dyn ForwardModel, rng: &mut impl Rng) -> Field {
    Field::from_fn(fwd.grid(), |_| rng.sample::<f64, _>(StandardNormal))
}

/// `||(R(p + h dp) - R(p - h dp)) / 2h - S dp|| / ||S dp||` for a random direction
/// scaled to `rel_step` of the largest property value.
pub fn jacobian_check(fwd: &dyn ForwardModel, p: &Field, rel_step: f64, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dp = random_field(fwd, &mut rng);
    let pmax = p.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dmax = dp.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let h = rel_step * pmax / dmax;
    let shifted = |sign: f64| Field::from_fn(fwd.grid(), |c| p[c] + sign * h * dp[c]);
    let plus = fwd.forward(&shifted(1.0))?;
    let minus = fwd.forward(&shifted(-1.0))?;
    let diff = plus.sub(&minus)?.to_complex();
    let fd: Vec<Complex64> = diff.iter().map(|z| z / (2.0 * h)).collect();
    let s = fwd.sensitivity(p)?;
    let sdp = s.apply(dp.values()).to_complex();
    let num: f64 = fd.iter().zip(&sdp).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = sdp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(num / den)
}

/// `|<w, S v> - <S^H w, v>| / max(|<w, S v>|, |<S^H w, v>|)` with the conjugating inner
/// product and random complex `v`, `w`.
pub fn adjoint_check(fwd: &dyn ForwardModel, p: &Field, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = fwd.sensitivity(p)?;
    let mut cplx =
        |n: usize| -> Vec<Complex64> { (0..n).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect() };
    let v = cplx(s.ncols());
    let w = cplx(s.nrows());
    let sv = s.apply_complex(&v);
    let shw = s.adjoint_complex(&w);
    let lhs: Complex64 = w.iter().zip(&sv).map(|(a, b)| a.conj() * b).sum();
    let rhs: Complex64 = shw.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
    Ok((lhs - rhs).norm() / lhs.norm().max(rhs.norm()))
}
