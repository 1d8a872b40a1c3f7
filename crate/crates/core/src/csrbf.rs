//! Wendland compactly supported radial basis functions of minimal degree.
//!
//! Every kernel has the form `psi(r) = (1 - r)_+^k * Q(r)` where `k = ell + l`,
//! `ell = floor(n / 2) + l + 1`, and `Q` is a polynomial of degree `l`. The
//! kernel is `C^{2l}` on `[0, inf)` and vanishes identically for `r >= 1`.

use serde::{Deserialize, Serialize};

/// A Wendland kernel `psi_{n,l}` for ambient dimension `n` and smoothness index `l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelSpec", into = "KernelSpec")]
pub struct WendlandKernel {
    space_dim: u32,
    smoothness: u32,
    power: i32,
    // Q(r) = q[0] + q[1] r + q[2] r^2 + q[3] r^3
    q: [f64; 4],
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct KernelSpec {
    space_dim: u32,
    smoothness: u32,
}

impl TryFrom<KernelSpec> for WendlandKernel {
    type Error = String;

    fn try_from(s: KernelSpec) -> Result<Self, String> {
        WendlandKernel::new(s.space_dim, s.smoothness)
            .ok_or_else(|| format!("unsupported Wendland kernel n={}, l={}", s.space_dim, s.smoothness))
    }
}

impl From<WendlandKernel> for KernelSpec {
    fn from(k: WendlandKernel) -> Self {
        KernelSpec { space_dim: k.space_dim, smoothness: k.smoothness }
    }
}

impl Default for WendlandKernel {
    /// `psi_{1,1}(r) = (1 - r)_+^3 (3r + 1)`.
    fn default() -> Self {
        WendlandKernel::new(1, 1).unwrap()
    }
}

impl WendlandKernel {
    /// Returns `None` unless `space_dim >= 1` and `smoothness` is 1, 2 or 3.
    pub fn new(space_dim: u32, smoothness: u32) -> Option<Self> {
        if space_dim == 0 {
            return None;
        }
        let ell = f64::from(space_dim / 2 + smoothness + 1);
        let q = match smoothness {
            1 => [1.0, ell + 1.0, 0.0, 0.0],
            2 => [3.0, 3.0 * ell + 6.0, ell * ell + 4.0 * ell + 3.0, 0.0],
            3 => [15.0, 15.0 * ell + 45.0, 6.0 * ell * ell + 36.0 * ell + 45.0, ell * ell * ell + 9.0 * ell * ell + 23.0 * ell + 15.0],
            _ => return None,
        };
        let power = (space_dim / 2 + 2 * smoothness + 1) as i32;
        Some(WendlandKernel { space_dim, smoothness, power, q })
    }

    pub fn space_dim(&self) -> u32 {
        self.space_dim
    }

    pub fn smoothness(&self) -> u32 {
        self.smoothness
    }

    /// `floor(n/2) + l + 1`.
    pub fn ell(&self) -> u32 {
        self.space_dim / 2 + self.smoothness + 1
    }

    /// Continuity order `2l` of the kernel.
    pub fn continuity(&self) -> u32 {
        2 * self.smoothness
    }

    #[inline]
    fn poly(&self, r: f64) -> f64 {
        let [a, b, c, d] = self.q;
        ((d * r + c) * r + b) * r + a
    }

    #[inline]
    fn poly_deriv(&self, r: f64) -> f64 {
        let [_, b, c, d] = self.q;
        (3.0 * d * r + 2.0 * c) * r + b
    }

    /// `psi(r)`; exactly zero for `r >= 1`.
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        (1.0 - r).powi(self.power) * self.poly(r)
    }

    /// `psi'(r)`; exactly zero for `r >= 1` and at `r = 0`.
    #[inline]
    pub fn eval_deriv(&self, r: f64) -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        let s = 1.0 - r;
        let k = f64::from(self.power);
        s.powi(self.power - 1) * (s * self.poly_deriv(r) - k * self.poly(r))
    }
}
