//! PaLS evolution: Jacobian assembly, Gauss-Newton quantities, and the
//! Levenberg-Marquardt and gradient-descent iterations.
//!
//! Complex residuals are handled through their real stacked view, so
//! `J^T r` and `J^T J` on stacked data are `Re(J^H r)` and `Re(J^H J)`.

use crate::error::{Error, Result};
use crate::forward::{DataVector, ForwardModel, SensitivityMatrix};
use crate::grid::Field;
use crate::pals::{self, PalsModel, ParamIndex};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    LevenbergMarquardt,
    GradientDescent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub scheme: Scheme,
    /// Initial damping (LM) or step length (gradient descent); derived from
    /// the first Gauss-Newton matrix when absent.
    pub lambda0: Option<f64>,
    pub lambda_up: f64,
    pub lambda_down: f64,
    pub max_iters: usize,
    /// Stop once `||R|| <= discrepancy_target`; the experiment harness fills in
    /// the injected noise norm when absent.
    pub discrepancy_target: Option<f64>,
    /// Relative cost decrease regarded as no progress.
    pub stagnation_tol: f64,
    /// Consecutive no-progress steps before stopping.
    pub stagnation_window: usize,
    pub step_tol: f64,
    /// Rejected trial steps allowed per iteration.
    pub max_retries: usize,
    pub unknown_contrasts: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            scheme: Scheme::LevenbergMarquardt,
            lambda0: None,
            lambda_up: 10.0,
            lambda_down: 0.1,
            max_iters: 100,
            discrepancy_target: None,
            stagnation_tol: 1e-6,
            stagnation_window: 5,
            step_tol: 1e-10,
            max_retries: 15,
            unknown_contrasts: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if let Some(l) = self.lambda0 {
            if !(l > 0.0) || !l.is_finite() {
                return bad("solver.lambda0 must be positive");
            }
        }
        if !(self.lambda_up > 1.0) {
            return bad("solver.lambda_up must exceed 1");
        }
        if !(self.lambda_down > 0.0 && self.lambda_down < 1.0) {
            return bad("solver.lambda_down must lie in (0, 1)");
        }
        if self.discrepancy_target.is_some_and(|t| !(t >= 0.0)) {
            return bad("solver.discrepancy_target must be nonnegative");
        }
        if !(self.stagnation_tol >= 0.0) || !(self.step_tol >= 0.0) {
            return bad("solver tolerances must be nonnegative");
        }
        if self.stagnation_window == 0 {
            return bad("solver.stagnation_window must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    Discrepancy,
    MaxIters,
    Stagnation,
}

/// One line of the convergence log, taken at the start of each iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub cost: f64,
    pub residual_norm: f64,
    /// Damping or step length used for the step leaving this iterate.
    pub lambda: f64,
    pub active_bumps: usize,
    pub contrast_in: f64,
    pub contrast_out: f64,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub model: PalsModel,
    pub iteration: usize,
    /// `0.5 ||R||^2`
    pub cost: f64,
    pub lambda: f64,
    pub cost_history: Vec<f64>,
    pub active_mask: Vec<bool>,
    pub stop_reason: Option<StopReason>,
    pub log: Vec<IterationRecord>,
}

/// Parameters updated when the bumps in `active` move.
pub fn active_parameters(active: &[usize], unknown_contrasts: bool) -> Vec<ParamIndex> {
    let mut out: Vec<ParamIndex> = active.iter().flat_map(|&j| ParamIndex::of_bump(j)).collect();
    if unknown_contrasts {
        out.push(ParamIndex::ContrastIn);
        out.push(ParamIndex::ContrastOut);
    }
    out
}

/// Stacked Jacobian of the residual with one column per entry of `params`.
pub fn assemble_jacobian(
    model: &PalsModel,
    phi: &Field,
    sens: &SensitivityMatrix,
    params: &[ParamIndex],
    grid: &crate::grid::Grid2D,
) -> DMatrix<f64> {
    let rows = sens.stacked_rows();
    let contrast = model.contrast_in - model.contrast_out;
    let c = model.level;
    let columns: Vec<Vec<f64>> = params
        .par_iter()
        .map(|&idx| {
            let mut col = vec![0.0; rows];
            match idx {
                ParamIndex::ContrastIn | ParamIndex::ContrastOut => {
                    let h: Vec<f64> = phi.values().iter().map(|&v| model.heaviside.eval(v - c)).collect();
                    let w: Vec<f64> = if idx == ParamIndex::ContrastIn { h } else { h.iter().map(|x| 1.0 - x).collect() };
                    col = sens.apply(&w).to_stacked();
                }
                _ => {
                    let (j, k) = match idx {
                        ParamIndex::Weight(j) => (j, 0),
                        ParamIndex::Dilation(j) => (j, 1),
                        ParamIndex::Center(j, a) => (j, 2 + a),
                        _ => unreachable!(),
                    };
                    if contrast != 0.0 {
                        for s in pals::bump_samples(model, grid, j) {
                            let d = model.heaviside.delta(phi[s.cell] - c);
                            if d != 0.0 {
                                sens.axpy_stacked_column(s.cell, contrast * d * s.grad[k], &mut col);
                            }
                        }
                    }
                }
            }
            col
        })
        .collect();
    let mut j = DMatrix::zeros(rows, params.len());
    for (k, col) in columns.into_iter().enumerate() {
        j.column_mut(k).copy_from_slice(&col);
    }
    j
}

/// `Re(J^H r)` on stacked data.
pub fn gradient(j: &DMatrix<f64>, r: &[f64]) -> DVector<f64> {
    j.tr_mul(&DVector::from_column_slice(r))
}

/// `Re(J^H J)` on stacked data.
pub fn gauss_newton_hessian(j: &DMatrix<f64>) -> DMatrix<f64> {
    j.tr_mul(j)
}

/// Solves `(H + lambda I) dmu = -g`.
pub fn lm_direction(h: &DMatrix<f64>, g: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    let mut a = h.clone();
    for i in 0..a.nrows() {
        a[(i, i)] += lambda;
    }
    let chol = a.cholesky().ok_or_else(|| Error::Solver("damped Gauss-Newton matrix is not positive definite".into()))?;
    Ok(-chol.solve(g))
}

/// Initial damping `1e-2 trace(H) / m`.
pub fn default_lambda(h: &DMatrix<f64>) -> f64 {
    let m = h.nrows().max(1) as f64;
    let t = h.trace() / m;
    if t > 0.0 && t.is_finite() {
        1e-2 * t
    } else {
        1.0
    }
}

fn apply_step(model: &PalsModel, params: &[ParamIndex], step: &DVector<f64>) -> PalsModel {
    let mut m = model.clone();
    for (&idx, &d) in params.iter().zip(step.iter()) {
        m.set(idx, model.get(idx) + d);
    }
    m.clamp_dilations();
    m
}

/// Cost at a trial model; an inadmissible property image counts as an infinite cost.
fn trial_cost(fwd: &dyn ForwardModel, model: &PalsModel, data: &DataVector) -> Result<f64> {
    let p = pals::property_map(model, fwd.grid());
    match fwd.residual(&p, data) {
        Ok(r) => Ok(0.5 * r.norm_sqr()),
        Err(Error::InvalidModel(_)) | Err(Error::Solver(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Outcome of one damped or backtracked step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub model: PalsModel,
    pub cost: f64,
    pub step: DVector<f64>,
    /// Damping or step length to start the next iteration with.
    pub next_lambda: f64,
}

/// Levenberg-Marquardt step with Marquardt's damping schedule. `None` when no
/// trial within the retry budget decreased the cost.
#[allow(clippy::too_many_arguments)]
pub fn lm_step(
    fwd: &dyn ForwardModel,
    data: &DataVector,
    model: &PalsModel,
    params: &[ParamIndex],
    g: &DVector<f64>,
    h: &DMatrix<f64>,
    cost: f64,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<Option<StepOutcome>> {
    let mut lambda = lambda;
    for _ in 0..=cfg.max_retries {
        let step = lm_direction(h, g, lambda)?;
        if step.norm() < cfg.step_tol {
            return Ok(None);
        }
        let trial = apply_step(model, params, &step);
        let c = trial_cost(fwd, &trial, data)?;
        if c < cost {
            return Ok(Some(StepOutcome { model: trial, cost: c, step, next_lambda: lambda * cfg.lambda_down }));
        }
        lambda *= cfg.lambda_up;
    }
    Ok(None)
}

/// Gradient-descent step `-lambda g`, halving `lambda` until the cost decreases.
/// An accepted step doubles the length for the next iteration.
#[allow(clippy::too_many_arguments)]
pub fn gd_step(
    fwd: &dyn ForwardModel,
    data: &DataVector,
    model: &PalsModel,
    params: &[ParamIndex],
    g: &DVector<f64>,
    cost: f64,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<Option<StepOutcome>> {
    let mut lambda = lambda;
    for _ in 0..=cfg.max_retries {
        let step = -g * lambda;
        if step.norm() < cfg.step_tol {
            return Ok(None);
        }
        let trial = apply_step(model, params, &step);
        let c = trial_cost(fwd, &trial, data)?;
        if c < cost {
            return Ok(Some(StepOutcome { model: trial, cost: c, step, next_lambda: 2.0 * lambda }));
        }
        lambda *= 0.5;
    }
    Ok(None)
}

/// Iterates from `model0` until the discrepancy target, the iteration cap, or stagnation.
pub fn run(cfg: &SolverConfig, model0: PalsModel, fwd: &dyn ForwardModel, data: &DataVector) -> Result<SolverState> {
    cfg.validate()?;
    model0.validate()?;
    if data.len() != fwd.data_len() {
        return Err(Error::DataMismatch { expected: fwd.data_len(), found: data.len() });
    }
    let grid = fwd.grid().clone();
    let mut state = SolverState {
        active_mask: vec![false; model0.bump_count()],
        model: model0,
        iteration: 0,
        cost: f64::NAN,
        lambda: cfg.lambda0.unwrap_or(f64::NAN),
        cost_history: Vec::new(),
        stop_reason: None,
        log: Vec::new(),
    };
    let mut flat_steps = 0usize;
    loop {
        let phi = pals::eval_phi(&state.model, &grid);
        let p = pals::property_from_phi(&state.model, &phi);
        let active = pals::active_bumps_from_phi(&state.model, &grid, &phi);
        state.active_mask = vec![false; state.model.bump_count()];
        for &j in &active {
            state.active_mask[j] = true;
        }
        let done = |r: &DataVector, it: usize| {
            if r.norm() <= cfg.discrepancy_target.unwrap_or(0.0) {
                Some(StopReason::Discrepancy)
            } else if it >= cfg.max_iters {
                Some(StopReason::MaxIters)
            } else {
                None
            }
        };
        let (r, sens) = fwd.linearize(&p, data)?;
        state.cost = 0.5 * r.norm_sqr();
        state.cost_history.push(state.cost);
        let mut record = IterationRecord {
            iteration: state.iteration,
            cost: state.cost,
            residual_norm: r.norm(),
            lambda: state.lambda,
            active_bumps: active.len(),
            contrast_in: state.model.contrast_in,
            contrast_out: state.model.contrast_out,
            params: state.model.params(true),
        };
        let stop = done(&r, state.iteration).or((flat_steps >= cfg.stagnation_window).then_some(StopReason::Stagnation));
        if let Some(reason) = stop {
            state.log.push(record);
            state.stop_reason = Some(reason);
            return Ok(state);
        }
        let params = active_parameters(&active, cfg.unknown_contrasts);
        let j = assemble_jacobian(&state.model, &phi, &sens, &params, &grid);
        let rs = r.to_stacked();
        let g = gradient(&j, &rs);
        let h = gauss_newton_hessian(&j);
        if state.lambda.is_nan() {
            state.lambda = match cfg.scheme {
                Scheme::LevenbergMarquardt => default_lambda(&h),
                Scheme::GradientDescent => 1.0 / h.trace().max(f64::MIN_POSITIVE),
            };
            record.lambda = state.lambda;
        }
        state.log.push(record);
        let outcome = match cfg.scheme {
            Scheme::LevenbergMarquardt => lm_step(fwd, data, &state.model, &params, &g, &h, state.cost, state.lambda, cfg)?,
            Scheme::GradientDescent => gd_step(fwd, data, &state.model, &params, &g, state.cost, state.lambda, cfg)?,
        };
        let Some(out) = outcome else {
            state.stop_reason = Some(StopReason::Stagnation);
            return Ok(state);
        };
        if (state.cost - out.cost) <= cfg.stagnation_tol * state.cost {
            flat_steps += 1;
        } else {
            flat_steps = 0;
        }
        state.model = out.model;
        state.lambda = out.next_lambda;
        state.iteration += 1;
    }
}
