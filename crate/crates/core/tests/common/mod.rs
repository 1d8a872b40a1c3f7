#![allow(dead_code)]

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use pals::checks;
use pals::forward::ct::{CtGeometry, CtModel};
use pals::forward::dot::{dot_matrix, dot_solve, DotModel, DotOperator, DotSetup};
use pals::forward::ert::{ert_solve, ErtModel, ErtSetup};
use pals::harness::noise::{rng, Stream};
use pals::optim::{self, SolverConfig};
use pals::{pals as level, Bump, DataVector, Field, ForwardModel, Grid2D, Heaviside, HeavisideKind, PalsModel, ParamIndex, WendlandKernel};
use rand::Rng;
use std::path::PathBuf;

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

/// Small full-view CT problem on `[-1, 1]^2`.
pub fn ct(n: usize) -> CtModel {
    let g = Grid2D::uniform(-1.0, 1.0, -1.0, 1.0, n, n).unwrap();
    let geom = CtGeometry { domain: g.bounds(), n_detectors: n + 2, angles: CtGeometry::degree_range(1.0, 179.0, 6.0) };
    CtModel::new(geom, g).unwrap()
}

pub fn disc(grid: &Grid2D, center: [f64; 2], r: f64, inside: f64, outside: f64) -> Field {
    Field::from_fn(grid, |c| {
        let [x, y] = grid.center(c);
        if (x - center[0]).hypot(y - center[1]) <= r {
            inside
        } else {
            outside
        }
    })
}

pub fn model(bumps: Vec<Bump>, kind: HeavisideKind, contrasts: (f64, f64)) -> PalsModel {
    PalsModel {
        bumps,
        contrast_in: contrasts.0,
        contrast_out: contrasts.1,
        level: 0.15,
        heaviside: Heaviside::new(kind, 0.1),
        norm_smoothing: 1e-3,
        kernel: WendlandKernel::default(),
        min_dilation: 0.05,
    }
}

pub fn random_bumps(rng: &mut impl Rng, m: usize, half_width: f64) -> Vec<Bump> {
    (0..m)
        .map(|_| Bump {
            weight: rng.random_range(-0.6..0.9),
            dilation: rng.random_range(1.5..4.0),
            center: [rng.random_range(-half_width..half_width), rng.random_range(-half_width..half_width)],
        })
        .collect()
}

// ---- forward oracles ----

/// Relative L2 error of CT projections of a rasterized disk against exact chord lengths.
pub fn disk_chord_error(n: usize) -> f64 {
    let r = 0.6;
    let g = Grid2D::uniform(-1.0, 1.0, -1.0, 1.0, n, n).unwrap();
    let geom = CtGeometry { domain: g.bounds(), n_detectors: 50, angles: CtGeometry::degree_range(0.0, 179.0, 7.0) };
    let fwd = CtModel::new(geom.clone(), g.clone()).unwrap();
    let DataVector::Real(d) = fwd.forward(&disc(&g, [0.0, 0.0], r, 1.0, 0.0)).unwrap() else { unreachable!() };
    let (mut num, mut den) = (0.0, 0.0);
    for a in 0..geom.angles.len() {
        for k in 0..geom.n_detectors {
            let (p, _) = geom.ray(a, k);
            let s = p[0].hypot(p[1]);
            let exact = if s < r { 2.0 * (r * r - s * s).sqrt() } else { 0.0 };
            num += (d[a * geom.n_detectors + k] - exact).powi(2);
            den += exact * exact;
        }
    }
    (num / den).sqrt()
}

/// `log3(|u_h - u_{h/3}| / |u_{h/3} - u_{h/9}|)` from values at the coarse cell centers.
fn order(coarse: &[f64], mid: &[f64], fine: &[f64]) -> f64 {
    let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    (d(coarse, mid) / d(mid, fine)).ln() / 3f64.ln()
}

/// Fine grid values at the centers of a coarse grid nested by an odd factor.
fn restrict<T: Copy>(fine: &[T], fine_grid: &Grid2D, coarse: &Grid2D) -> Vec<T> {
    (0..coarse.cell_count())
        .map(|c| {
            let [x, y] = coarse.center(c);
            fine[fine_grid.locate(x, y).unwrap()]
        })
        .collect()
}

fn ert_on(n: usize) -> (Grid2D, Vec<f64>) {
    let g = Grid2D::uniform(-1.0, 1.0, -1.0, 0.0, 2 * n, n).unwrap();
    let sigma = Field::from_fn(&g, |c| {
        let [x, y] = g.center(c);
        1.0 + 0.5 * (2.0 * x).sin() * (3.0 * y).cos()
    });
    let src: Vec<(usize, f64)> = (0..g.cell_count())
        .map(|c| {
            let [x, y] = g.center(c);
            (c, g.area(c) * (-((x - 0.2).powi(2) + (y + 0.4).powi(2)) / 0.02).exp())
        })
        .collect();
    (g.clone(), ert_solve(&g, &sigma, &src).unwrap().into_values())
}

/// Observed convergence order of the resistivity solver on nested 20x10, 60x30, 180x90 grids.
pub fn ert_order() -> f64 {
    let (g1, u1) = ert_on(10);
    let (g3, u3) = ert_on(30);
    let (g9, u9) = ert_on(90);
    order(&u1, &restrict(&u3, &g3, &g1), &restrict(&u9, &g9, &g1))
}

fn dot_on(n: usize, freq: f64) -> (Grid2D, Vec<Complex64>) {
    let s = DotSetup::square(0.05, n, 2, vec![freq], 600.0).unwrap();
    let g = s.grid.clone();
    let alpha: Vec<f64> = (0..g.cell_count())
        .map(|c| {
            let [x, y] = g.center(c);
            0.5 + 0.3 * (60.0 * x).sin() * (40.0 * y).cos()
        })
        .collect();
    let op = DotOperator::new(&s, &alpha, freq).unwrap();
    let rhs: Vec<Complex64> = (0..g.cell_count())
        .map(|c| {
            let [x, y] = g.center(c);
            Complex64::new(g.area(c) * (-((x - 0.02).powi(2) + (y - 0.03).powi(2)) / 5e-5).exp(), 0.0)
        })
        .collect();
    (g, op.solve(&rhs))
}

/// Observed convergence order of the diffusion solver at `freq` on nested 10, 30, 90 grids.
pub fn dot_order(freq: f64) -> f64 {
    let split = |u: Vec<Complex64>| -> Vec<f64> { u.iter().flat_map(|z| [z.re, z.im]).collect() };
    let (g1, u1) = dot_on(10, freq);
    let (g3, u3) = dot_on(30, freq);
    let (g9, u9) = dot_on(90, freq);
    order(&split(u1), &split(restrict(&u3, &g3, &g1)), &split(restrict(&u9, &g9, &g1)))
}

/// Relative reciprocity gap `|u_a(b) - u_b(a)| / |u_a(b)|` of the resistivity solver.
pub fn ert_reciprocity_gap() -> f64 {
    let setup = ErtSetup::with_resolution(15, 5, 0.01).unwrap();
    let g = setup.grid.clone();
    let sigma = Field::from_fn(&g, |c| 0.01 + 0.04 * ((c * 7919) % 13) as f64 / 13.0);
    let cells = setup.sensor_cells();
    let (a, b) = (cells[2], cells[25]);
    let ua = ert_solve(&g, &sigma, &[(a, 1.0)]).unwrap();
    let ub = ert_solve(&g, &sigma, &[(b, 1.0)]).unwrap();
    (ua[b] - ub[a]).abs() / ua[b].abs()
}

/// `(max |A_ij - A_ji|, reciprocity gap)` of the frequency-domain diffusion operator.
pub fn dot_symmetry_gaps() -> (f64, f64) {
    let s = DotSetup::square(0.05, 20, 4, vec![50e6], 600.0).unwrap();
    let a = Field::from_fn(&s.grid, |c| 0.5 + 0.01 * (c % 9) as f64);
    let m = dot_matrix(&s, &a, 50e6).unwrap();
    let mut asym = 0.0f64;
    for i in 0..m.size() {
        for j in i.saturating_sub(m.bandwidth())..(i + m.bandwidth() + 1).min(m.size()) {
            asym = asym.max((m.get(i, j) - m.get(j, i)).norm());
        }
    }
    let src = s.cell_of(s.sources[1]).unwrap();
    let det = s.cell_of(s.detectors[3]).unwrap();
    let u = dot_solve(&s, &a, src, 50e6).unwrap();
    let v = dot_solve(&s, &a, det, 50e6).unwrap();
    (asym, (u[det] - v[src]).norm() / u[det].norm())
}

/// One small instance of each physics with a piecewise constant property.
pub fn small_models() -> Vec<(&'static str, Box<dyn ForwardModel>, Field)> {
    let c = ct(16);
    let g = c.grid().clone();
    let pct = disc(&g, [0.0, 0.0], 0.5, 2.5, 1.0);
    let ert = ErtModel::new(ErtSetup::with_resolution(12, 4, 0.01).unwrap()).unwrap();
    let ge = ert.grid().clone();
    let pert = Field::from_fn(&ge, |c| if ge.center(c)[1] > -0.5 { 0.05 } else { 0.01 });
    let dot = DotModel::new(DotSetup::square(0.05, 12, 3, vec![0.0, 50e6], 600.0).unwrap()).unwrap();
    let gd = dot.grid().clone();
    let pdot = Field::from_fn(&gd, |c| if gd.center(c)[0] < 0.025 { 1.5 } else { 0.5 });
    vec![("ct", Box::new(c), pct), ("ert", Box::new(ert), pert), ("dot", Box::new(dot), pdot)]
}

/// `(name, jacobian error, adjoint error)` for every physics.
pub fn jacobian_adjoint_errors() -> Vec<(&'static str, f64, f64)> {
    small_models()
        .into_iter()
        .map(|(name, fwd, p)| {
            let jac = checks::jacobian_check(fwd.as_ref(), &p, 1e-4, 11).unwrap();
            let adj = checks::adjoint_check(fwd.as_ref(), &p, 5).unwrap();
            (name, jac, adj)
        })
        .collect()
}

// ---- optimizer oracles ----

/// Worst relative gradient error over five random 5-bump models on 16x16 CT, contrasts included.
pub fn gradient_oracle() -> (usize, f64) {
    let fwd = ct(16);
    let data = fwd.forward(&disc(fwd.grid(), [0.1, -0.1], 0.5, 2.0, 1.0)).unwrap();
    let mut worst = (0, 0.0f64);
    for seed in 0..5 {
        let m = model(random_bumps(&mut rng(seed, Stream::Init), 5, 0.5), HeavisideKind::H2, (1.6, 0.7));
        let chk = checks::gradient_check(&fwd, &m, &data, true, 1e-5).unwrap();
        worst = (chk.params.len(), worst.1.max(chk.max_rel_error));
    }
    worst
}

/// Smallest eigenvalue of the Gauss-Newton matrix relative to its largest entry over 50 random models.
pub fn gramian_min_relative_eigenvalue() -> f64 {
    let fwd = ct(16);
    let g = fwd.grid().clone();
    let data = fwd.forward(&disc(&g, [0.0, 0.0], 0.4, 2.0, 1.0)).unwrap();
    let mut r = rng(7, Stream::Init);
    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let m = model(random_bumps(&mut r, 8, 0.7), HeavisideKind::H2, (2.0, 1.0));
        let phi = level::eval_phi(&m, &g);
        let p = level::property_from_phi(&m, &phi);
        let (_, sens) = fwd.linearize(&p, &data).unwrap();
        let params = optim::active_parameters(&(0..8).collect::<Vec<_>>(), true);
        let j = optim::assemble_jacobian(&m, &phi, &sens, &params, &g);
        let h = optim::gauss_newton_hessian(&j);
        let norm = h.norm();
        if norm > 0.0 {
            worst = worst.min(SymmetricEigen::new(h).eigenvalues.min() / norm);
        }
    }
    worst
}

/// Four overlapping bumps forming a blob on the left, and bump 4 on its own in
/// the upper right whose level set values never reach the transition band.
pub fn freeze_bumps() -> Vec<Bump> {
    vec![
        Bump { weight: 0.5, dilation: 3.0, center: [-0.35, 0.0] },
        Bump { weight: 0.4, dilation: 3.0, center: [-0.15, 0.1] },
        Bump { weight: 0.45, dilation: 3.2, center: [-0.25, -0.15] },
        Bump { weight: -0.2, dilation: 3.5, center: [-0.1, -0.05] },
        Bump { weight: 0.03, dilation: 4.0, center: [0.6, 0.6] },
    ]
}

pub const ISOLATED: usize = 4;

pub fn freeze_problem() -> (CtModel, DataVector) {
    let fwd = ct(32);
    let data = fwd.forward(&disc(fwd.grid(), [-0.2, 0.1], 0.35, 2.0, 1.0)).unwrap();
    (fwd, data)
}

/// One LM iteration with a fixed initial damping.
pub fn one_iteration(m: PalsModel) -> PalsModel {
    let (fwd, data) = freeze_problem();
    let cfg = SolverConfig { lambda0: Some(1.0), max_iters: 1, ..SolverConfig::default() };
    optim::run(&cfg, m, &fwd, &data).unwrap().model
}

pub struct FreezeOutcome {
    /// Parameters of the isolated bump unchanged bit for bit.
    pub frozen: bool,
    /// Largest relative difference of the other updates with and without the isolated bump.
    pub update_gap: f64,
    /// Some other parameter actually moved.
    pub moved: bool,
}

pub fn freeze_experiment(kind: HeavisideKind) -> FreezeOutcome {
    let m0 = model(freeze_bumps(), kind, (2.0, 1.0));
    let m1 = one_iteration(m0.clone());
    let (a, b) = (m1.bumps[ISOLATED], m0.bumps[ISOLATED]);
    let frozen = a.weight.to_bits() == b.weight.to_bits()
        && a.dilation.to_bits() == b.dilation.to_bits()
        && a.center.map(f64::to_bits) == b.center.map(f64::to_bits);
    let mut reduced = m0.clone();
    reduced.bumps.remove(ISOLATED);
    let r1 = one_iteration(reduced.clone());
    let (mut gap, mut moved) = (0.0f64, false);
    for j in 0..ISOLATED {
        for idx in ParamIndex::of_bump(j) {
            let (full, red) = (m1.get(idx) - m0.get(idx), r1.get(idx) - reduced.get(idx));
            moved |= full != 0.0;
            gap = gap.max((full - red).abs() / full.abs().max(1e-12));
        }
    }
    FreezeOutcome { frozen, update_gap: gap, moved }
}

// ---- Heaviside ----

/// Largest deviation of the compact Heaviside from exact 0/1 (and of its delta from 0) outside the band.
pub fn h2_saturation_error(eps: f64) -> f64 {
    let h = Heaviside::new(HeavisideKind::H2, eps);
    let mut worst = 0.0f64;
    for k in 0..=1000 {
        let t = eps * (1.0 + k as f64 * 0.01);
        worst = worst.max((h.eval(t) - 1.0).abs()).max(h.eval(-t).abs()).max(h.delta(t)).max(h.delta(-t));
    }
    worst
}

/// `|integral of delta_2 - 1|` by composite Simpson over `[-eps, eps]`.
pub fn h2_delta_integral_error(eps: f64) -> f64 {
    let h = Heaviside::new(HeavisideKind::H2, eps);
    let n = 2000;
    let dt = 2.0 * eps / n as f64;
    let s: f64 = (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h.delta(-eps + i as f64 * dt)
        })
        .sum();
    (s * dt / 3.0 - 1.0).abs()
}
