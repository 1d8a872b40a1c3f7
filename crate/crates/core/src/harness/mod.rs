//! Experiment plumbing: configuration, phantoms, synthetic data, PaLS
//! initialization, shape metrics, and result files.

pub mod config;
pub mod metrics;
pub mod noise;
pub mod output;
pub mod phantom;

pub use config::{ExperimentConfig, ModelConfig, NoiseConvention, PalsConfig, PhantomConfig, ShapeConfig, ShapeOp};
pub use metrics::{jaccard, shape_metrics, symmetric_difference_fraction, ShapeMetrics};
pub use phantom::Phantom;

use crate::error::Result;
use crate::forward::ct::{CtGeometry, CtModel};
use crate::forward::dot::{DotModel, DotSetup, SPEED_OF_LIGHT};
use crate::forward::ert::{ErtModel, ErtSetup};
use crate::forward::{DataVector, ForwardModel};
use crate::grid::{Field, Grid2D};
use crate::optim::{self, SolverConfig, SolverState};
use crate::pals::{self, Bump, Heaviside, PalsModel};
use noise::Stream;
use rand::Rng;
use std::path::Path;

pub fn build_forward(model: &ModelConfig, phantom: &PhantomConfig) -> Result<Box<dyn ForwardModel>> {
    Ok(match model {
        ModelConfig::Ct(c) => {
            let [x0, x1, y0, y1] = c.domain;
            let grid = Grid2D::uniform(x0, x1, y0, y1, c.cells[0], c.cells[1])?;
            let [a0, a1, step] = c.angles_deg;
            let geom = CtGeometry { domain: c.domain, n_detectors: c.detectors, angles: CtGeometry::degree_range(a0, a1, step) };
            Box::new(CtModel::new(geom, grid)?)
        }
        ModelConfig::Ert(e) => {
            let setup = ErtSetup::with_resolution(e.inner, e.outer, e.background.unwrap_or(phantom.outside))?;
            Box::new(ErtModel::new(setup)?)
        }
        ModelConfig::Dot(d) => {
            let mut setup = DotSetup::square(d.side, d.cells, d.optodes, d.frequencies.clone(), d.reduced_scattering)?;
            setup.light_speed = SPEED_OF_LIGHT / d.refractive_index;
            Box::new(DotModel::new(setup)?)
        }
    })
}

/// Random centers in the box, weights alternating `+w, -w`, uniform dilation.
pub fn init_pals(cfg: &PalsConfig, grid: &Grid2D, contrasts: (f64, f64), seed: u64) -> Result<PalsModel> {
    let [x0, x1, y0, y1] = cfg.center_box.unwrap_or(grid.bounds());
    let mut rng = noise::rng(seed, Stream::Init);
    let bumps = (0..cfg.bumps)
        .map(|j| Bump {
            weight: if j % 2 == 0 { cfg.weight } else { -cfg.weight },
            dilation: cfg.dilation,
            center: [rng.random_range(x0..x1), rng.random_range(y0..y1)],
        })
        .collect();
    let model = PalsModel {
        bumps,
        contrast_in: cfg.contrast_in.unwrap_or(contrasts.0),
        contrast_out: cfg.contrast_out.unwrap_or(contrasts.1),
        level: cfg.level,
        heaviside: Heaviside::new(cfg.heaviside, cfg.epsilon),
        norm_smoothing: cfg.norm_smoothing.unwrap_or(0.01 * grid.min_spacing()),
        kernel: cfg.kernel,
        min_dilation: cfg.min_dilation.unwrap_or(PalsModel::default_min_dilation(grid.diagonal())),
    };
    model.validate()?;
    Ok(model)
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    /// Property image the data were generated from (the phantom plus any heterogeneity).
    pub truth: Field,
    pub clean: DataVector,
    pub noisy: DataVector,
    pub noise_norm: f64,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub initial: PalsModel,
    pub state: SolverState,
    pub phi: Field,
    pub property: Field,
    /// Recovered superlevel set `phi >= c`.
    pub mask: Vec<bool>,
    pub metrics: ShapeMetrics,
}

/// A configured experiment with its forward model and rasterized phantom.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub forward: Box<dyn ForwardModel>,
    pub phantom: Phantom,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let forward = build_forward(&config.model, &config.phantom)?;
        let phantom = Phantom::rasterize(&config.phantom, forward.grid());
        Ok(Experiment { config, forward, phantom })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Experiment::new(ExperimentConfig::load(path)?)
    }

    pub fn grid(&self) -> &Grid2D {
        self.forward.grid()
    }

    pub fn seed(&self) -> u64 {
        self.config.noise.seed
    }

    pub fn synthesize(&self) -> Result<SyntheticData> {
        let mut hrng = noise::rng(self.seed(), Stream::Heterogeneity);
        let truth = self.phantom.heterogeneous(self.config.phantom.heterogeneity_percent, &mut hrng);
        let clean = self.forward.forward(&truth)?;
        let mut nrng = noise::rng(self.seed(), Stream::Noise);
        let (noisy, noise_norm) = noise::add_noise(&clean, self.config.noise.percent, self.config.noise.convention, &mut nrng);
        Ok(SyntheticData { truth, clean, noisy, noise_norm })
    }

    pub fn initial_model(&self) -> Result<PalsModel> {
        init_pals(&self.config.pals, self.grid(), (self.phantom.inside, self.phantom.outside), self.seed())
    }

    /// Solver settings with the discrepancy target defaulting to the injected noise norm.
    pub fn solver_config(&self, noise_norm: f64) -> SolverConfig {
        let mut s = self.config.solver.clone();
        s.discrepancy_target.get_or_insert(noise_norm);
        s
    }

    pub fn reconstruct(&self, data: &SyntheticData) -> Result<Reconstruction> {
        let initial = self.initial_model()?;
        let cfg = self.solver_config(data.noise_norm);
        let state = optim::run(&cfg, initial.clone(), self.forward.as_ref(), &data.noisy)?;
        let grid = self.grid();
        let phi = pals::eval_phi(&state.model, grid);
        let property = pals::property_from_phi(&state.model, &phi);
        let mask: Vec<bool> = phi.values().iter().map(|&v| v >= state.model.level).collect();
        let metrics = shape_metrics(&mask, &self.phantom.mask, state.model.contrast_in, state.model.contrast_out);
        Ok(Reconstruction { initial, state, phi, property, mask, metrics })
    }

    pub fn write_phantom(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        output::write_field_csv(&dir.join("truth.csv"), self.grid(), &self.phantom.truth)?;
        output::write_pgm(&dir.join("truth.pgm"), self.grid(), &self.phantom.truth)
    }

    pub fn write_data(&self, dir: &Path, data: &SyntheticData) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        output::write_data_csv(&dir.join("data_clean.csv"), &data.clean)?;
        output::write_data_csv(&dir.join("data_noisy.csv"), &data.noisy)?;
        let entries = vec![
            ("seed".to_string(), self.seed().to_string()),
            ("noise_percent".to_string(), self.config.noise.percent.to_string()),
            ("data_len".to_string(), data.clean.len().to_string()),
            ("clean_norm".to_string(), format!("{:e}", data.clean.norm())),
            ("noise_norm".to_string(), format!("{:e}", data.noise_norm)),
        ];
        output::write_key_values(&dir.join("noise.txt"), &entries)
    }

    pub fn write_reconstruction(&self, dir: &Path, data: &SyntheticData, rec: &Reconstruction) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let g = self.grid();
        self.write_phantom(dir)?;
        self.write_data(dir, data)?;
        output::write_field_csv(&dir.join("property.csv"), g, &rec.property)?;
        output::write_pgm(&dir.join("property.pgm"), g, &rec.property)?;
        output::write_field_csv(&dir.join("phi.csv"), g, &rec.phi)?;
        output::write_pgm(&dir.join("phi.pgm"), g, &rec.phi)?;
        output::write_convergence_log(&dir.join("convergence.csv"), &rec.state.log)?;
        if self.config.output.snapshots {
            output::write_parameter_snapshots(&dir.join("parameters.csv"), &rec.state.log)?;
        }
        std::fs::write(dir.join("config.toml"), self.config.to_toml())?;
        let m = &rec.metrics;
        let last = rec.state.log.last();
        let entries = vec![
            ("stop_reason".to_string(), format!("{:?}", rec.state.stop_reason.expect("finished run"))),
            ("iterations".to_string(), rec.state.iteration.to_string()),
            ("final_cost".to_string(), format!("{:e}", rec.state.cost)),
            ("final_residual_norm".to_string(), format!("{:e}", last.map_or(f64::NAN, |r| r.residual_norm))),
            ("noise_norm".to_string(), format!("{:e}", data.noise_norm)),
            ("jaccard".to_string(), format!("{}", m.jaccard)),
            ("symmetric_difference".to_string(), format!("{}", m.symmetric_difference)),
            ("contrast_in".to_string(), format!("{}", m.contrast_in)),
            ("contrast_out".to_string(), format!("{}", m.contrast_out)),
            ("seed".to_string(), self.seed().to_string()),
        ];
        output::write_key_values(&dir.join("metrics.txt"), &entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(bumps: usize) -> PalsConfig {
        PalsConfig {
            bumps,
            weight: 0.2,
            dilation: 4.0,
            center_box: Some([-0.4, 0.4, -0.8, 0.0]),
            level: 0.15,
            epsilon: 0.1,
            heaviside: pals::HeavisideKind::H2,
            norm_smoothing: None,
            kernel: Default::default(),
            min_dilation: None,
            contrast_in: None,
            contrast_out: Some(0.005),
        }
    }

    #[test]
    fn initialization_follows_the_recipe() {
        let g = Grid2D::uniform(-0.5, 0.5, -1.0, 0.0, 75, 75).unwrap();
        let m = init_pals(&cfg(40), &g, (0.05, 0.01), 9).unwrap();
        assert_eq!(m.bump_count(), 40);
        for (j, b) in m.bumps.iter().enumerate() {
            assert_eq!(b.weight, if j % 2 == 0 { 0.2 } else { -0.2 });
            assert_eq!(b.dilation, 4.0);
            assert!((-0.4..0.4).contains(&b.center[0]) && (-0.8..0.0).contains(&b.center[1]));
        }
        assert_eq!((m.contrast_in, m.contrast_out), (0.05, 0.005));
        assert!((m.norm_smoothing - 0.01 / 75.0).abs() < 1e-15);
        assert_eq!(m, init_pals(&cfg(40), &g, (0.05, 0.01), 9).unwrap());
        assert_ne!(m, init_pals(&cfg(40), &g, (0.05, 0.01), 10).unwrap());
    }
}
