//! Experiment configuration, read from TOML.

use crate::csrbf::WendlandKernel;
use crate::error::{Error, Result};
use crate::optim::SolverConfig;
use crate::pals::HeavisideKind;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub phantom: PhantomConfig,
    pub pals: PalsConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelConfig {
    Ct(CtConfig),
    Ert(ErtConfig),
    Dot(DotConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CtConfig {
    /// `[x0, x1, y0, y1]`
    pub domain: [f64; 4],
    /// `[nx, ny]`
    pub cells: [usize; 2],
    pub detectors: usize,
    /// Projection angles in degrees: `[first, last, step]`, inclusive.
    pub angles_deg: [f64; 3],
}

impl Default for CtConfig {
    fn default() -> Self {
        CtConfig { domain: [-1.0, 1.0, -1.0, 1.0], cells: [64, 64], detectors: 34, angles_deg: [1.0, 179.0, 1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ErtConfig {
    /// Uniform cells per side of the imaging region.
    pub inner: usize,
    /// Graded padding cells on each exterior side.
    pub outer: usize,
    /// Conductivity outside the imaging region; the phantom's outside value when absent.
    pub background: Option<f64>,
}

impl Default for ErtConfig {
    fn default() -> Self {
        ErtConfig { inner: 75, outer: 25, background: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DotConfig {
    /// Side of the square domain, m.
    pub side: f64,
    pub cells: usize,
    /// Sources on top and detectors on the bottom.
    pub optodes: usize,
    /// Hz.
    pub frequencies: Vec<f64>,
    /// 1/m.
    pub reduced_scattering: f64,
    pub refractive_index: f64,
}

impl Default for DotConfig {
    fn default() -> Self {
        DotConfig {
            side: 0.05,
            cells: 50,
            optodes: 8,
            frequencies: vec![0.0, 25e6, 50e6],
            reduced_scattering: 600.0,
            refractive_index: 1.37,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeOp {
    #[default]
    Add,
    Subtract,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ShapeConfig {
    Disc {
        center: [f64; 2],
        radius: f64,
        #[serde(default)]
        op: ShapeOp,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
        #[serde(default)]
        op: ShapeOp,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomConfig {
    pub inside: f64,
    pub outside: f64,
    /// Additive Gaussian perturbation, percent of the mean property value.
    #[serde(default)]
    pub heterogeneity_percent: f64,
    pub shapes: Vec<ShapeConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PalsConfig {
    pub bumps: usize,
    #[serde(default = "default_weight")]
    pub weight: f64,
    pub dilation: f64,
    /// Box `[x0, x1, y0, y1]` for the random initial centers; the inversion grid when absent.
    #[serde(default, rename = "box")]
    pub center_box: Option<[f64; 4]>,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_heaviside")]
    pub heaviside: HeavisideKind,
    /// Defaults to 1% of the smallest cell spacing.
    #[serde(default)]
    pub norm_smoothing: Option<f64>,
    #[serde(default)]
    pub kernel: WendlandKernel,
    /// Defaults to `1 / (20 * domain diagonal)`.
    #[serde(default)]
    pub min_dilation: Option<f64>,
    /// Initial inside value; the phantom's when absent.
    #[serde(default)]
    pub contrast_in: Option<f64>,
    #[serde(default)]
    pub contrast_out: Option<f64>,
}

fn default_weight() -> f64 {
    0.2
}
fn default_level() -> f64 {
    0.15
}
fn default_epsilon() -> f64 {
    0.1
}
fn default_heaviside() -> HeavisideKind {
    HeavisideKind::H2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseConvention {
    /// `std = p/100 * ||clean|| / sqrt(N)` for every entry.
    #[default]
    Global,
    /// `std_k = p/100 * |clean_k|`.
    PerSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub percent: f64,
    /// Master seed for noise, initialization, and heterogeneity.
    pub seed: u64,
    pub convention: NoiseConvention,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig { percent: 0.0, seed: 0, convention: NoiseConvention::Global }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write the PaLS parameters of every iterate.
    pub snapshots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), snapshots: true }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        ExperimentConfig::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match &self.model {
            ModelConfig::Ct(c) => {
                if c.cells.contains(&0) || c.detectors == 0 {
                    return bad("model: cells and detectors must be positive".into());
                }
                if !(c.angles_deg[2] > 0.0) || c.angles_deg[1] < c.angles_deg[0] {
                    return bad("model.angles_deg must be [first, last, step] with step > 0".into());
                }
            }
            ModelConfig::Ert(e) => {
                if e.inner == 0 || e.outer == 0 {
                    return bad("model: inner and outer cell counts must be positive".into());
                }
                if e.background.is_some_and(|b| !(b > 0.0)) {
                    return bad("model.background must be positive".into());
                }
            }
            ModelConfig::Dot(d) => {
                if d.cells == 0 || d.optodes == 0 || !(d.side > 0.0) {
                    return bad("model: side, cells and optodes must be positive".into());
                }
                if d.frequencies.is_empty() || d.frequencies.iter().any(|f| !(*f >= 0.0)) {
                    return bad("model.frequencies must be nonnegative".into());
                }
                if !(d.reduced_scattering > 0.0) || !(d.refractive_index > 0.0) {
                    return bad("model: reduced_scattering and refractive_index must be positive".into());
                }
            }
        }
        let ph = &self.phantom;
        if ph.shapes.is_empty() {
            return bad("phantom.shapes must list at least one shape".into());
        }
        if !(ph.heterogeneity_percent >= 0.0) {
            return bad("phantom.heterogeneity_percent must be nonnegative".into());
        }
        for (i, s) in ph.shapes.iter().enumerate() {
            match s {
                ShapeConfig::Disc { radius, .. } if !(*radius > 0.0) => {
                    return bad(format!("phantom.shapes[{i}]: radius must be positive"));
                }
                ShapeConfig::Polygon { vertices, .. } if vertices.len() < 3 => {
                    return bad(format!("phantom.shapes[{i}]: a polygon needs at least 3 vertices"));
                }
                _ => {}
            }
        }
        let p = &self.pals;
        if p.bumps == 0 {
            return bad("pals.bumps must be positive".into());
        }
        if !(p.epsilon > 0.0) {
            return bad("pals.epsilon must be positive".into());
        }
        if p.heaviside == HeavisideKind::H2 && p.level.abs() < p.epsilon {
            return bad(format!("pals: H2 requires |level| >= epsilon (level = {}, epsilon = {})", p.level, p.epsilon));
        }
        if p.dilation == 0.0 || !p.dilation.is_finite() {
            return bad("pals.dilation must be finite and nonzero".into());
        }
        if p.norm_smoothing.is_some_and(|u| u == 0.0 || !u.is_finite()) {
            return bad("pals.norm_smoothing must be finite and nonzero".into());
        }
        if p.min_dilation.is_some_and(|m| !(m > 0.0)) {
            return bad("pals.min_dilation must be positive".into());
        }
        if let Some([x0, x1, y0, y1]) = p.center_box {
            if !(x0 < x1 && y0 < y1) {
                return bad("pals.box must be [x0, x1, y0, y1] with x0 < x1 and y0 < y1".into());
            }
        }
        if !(self.noise.percent >= 0.0) {
            return bad("noise.percent must be nonnegative".into());
        }
        self.solver.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[model]
kind = "ct"

[phantom]
inside = 2.5
outside = 1.0
shapes = [{ type = "disc", center = [0.0, 0.0], radius = 0.5 }]

[pals]
bumps = 10
dilation = 2.5
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.model, ModelConfig::Ct(CtConfig::default()));
        assert_eq!(c.pals.level, 0.15);
        assert_eq!(c.pals.heaviside, HeavisideKind::H2);
        assert_eq!(c.pals.kernel, WendlandKernel::default());
        assert_eq!(c.solver, SolverConfig::default());
        assert_eq!(c.noise.percent, 0.0);
    }

    #[test]
    fn roundtrip() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn missing_section_is_named() {
        let text = MINIMAL.replace("[pals]\nbumps = 10\ndilation = 2.5\n", "");
        let e = ExperimentConfig::from_toml(&text).unwrap_err().to_string();
        assert!(e.contains("pals"), "{e}");
    }

    #[test]
    fn h2_level_constraint() {
        let text = MINIMAL.replace("dilation = 2.5", "dilation = 2.5\nlevel = 0.05");
        let e = ExperimentConfig::from_toml(&text).unwrap_err().to_string();
        assert!(e.contains("|level| >= epsilon"), "{e}");
        let text = MINIMAL.replace("dilation = 2.5", "dilation = 2.5\nlevel = 0.05\nheaviside = \"h1\"");
        assert!(ExperimentConfig::from_toml(&text).is_ok());
    }

    #[test]
    fn unknown_keys_and_bad_values_are_reported_with_location() {
        let e = ExperimentConfig::from_toml(&MINIMAL.replace("bumps = 10", "bumps = 10\nbumbs = 3")).unwrap_err().to_string();
        assert!(e.contains("bumbs") && e.contains("line"), "{e}");
        let e = ExperimentConfig::from_toml(&MINIMAL.replace("kind = \"ct\"", "kind = \"mri\"")).unwrap_err().to_string();
        assert!(e.contains("mri"), "{e}");
        assert!(ExperimentConfig::from_toml(&MINIMAL.replace("radius = 0.5", "radius = -0.5")).is_err());
    }

    #[test]
    fn model_variants_parse() {
        let ert = MINIMAL.replace("kind = \"ct\"", "kind = \"ert\"\ninner = 30\nouter = 10");
        let c = ExperimentConfig::from_toml(&ert).unwrap();
        assert_eq!(c.model, ModelConfig::Ert(ErtConfig { inner: 30, outer: 10, background: None }));
        let dot = MINIMAL.replace("kind = \"ct\"", "kind = \"dot\"\nfrequencies = [0.0]");
        let c = ExperimentConfig::from_toml(&dot).unwrap();
        assert!(matches!(c.model, ModelConfig::Dot(DotConfig { ref frequencies, .. }) if frequencies == &[0.0]));
    }
}
