//! Parametric level set (PaLS) shape reconstruction.
//!
//! A shape is the `c`-superlevel set of a sum of compactly supported Wendland
//! bumps with adaptive weights, dilations, and centers. The bump parameters
//! (and optionally the two property values) are fitted to measurements with a
//! Levenberg-Marquardt or gradient-descent evolution using adjoint pixel
//! sensitivities from one of the bundled forward models.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod csrbf;
pub mod error;
pub mod forward;
pub mod grid;
pub mod harness;
pub mod optim;
pub mod pals;

pub use csrbf::WendlandKernel;
pub use error::{Error, Result};
pub use forward::{DataVector, ForwardModel, SensitivityMatrix};
pub use grid::{Field, Grid2D};
pub use optim::{Scheme, SolverConfig, SolverState, StopReason};
pub use pals::{Bump, Heaviside, HeavisideKind, PalsModel, ParamIndex};
