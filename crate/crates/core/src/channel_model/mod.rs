//! Channel geometry, fluid parameters, wall-normal profiles and their sine
//! spectra, plus the stationary NSE / NS-alpha profiles and the bridge that
//! maps an averaged NSE profile onto an NS-alpha solution.

mod profile;
mod spectrum;
mod stationary;

pub use profile::{uniform_grid, MeanProfile, ProfileSource};
pub use spectrum::SineSpectrum;
pub use stationary::{
    ns_alpha_bridge, ns_alpha_profile, ns_alpha_value, poiseuille_profile, poiseuille_value,
    stationary_residual, stationary_residual_with, BridgeOutput, BridgePressure,
    DerivativeMode, StationaryResidual,
};

use crate::error::{ensure, Result};

/// A plane channel `R x R x [x3_lower, x3_upper]`, periodic in `x1`, `x2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelGeometry {
    h: f64,
    pi1: f64,
    pi2: f64,
    x3_lower: f64,
    x3_upper: f64,
}

impl ChannelGeometry {
    /// Channel of height `h` with walls at `0` and `h`.
    pub fn new(h: f64, pi1: f64, pi2: f64) -> Result<Self> {
        Self::with_walls(0.0, h, pi1, pi2)
    }

    pub fn with_walls(x3_lower: f64, x3_upper: f64, pi1: f64, pi2: f64) -> Result<Self> {
        ensure!(
            x3_lower.is_finite() && x3_upper.is_finite(),
            Validation,
            "wall positions must be finite"
        );
        let h = x3_upper - x3_lower;
        ensure!(h > 0.0, Validation, "channel height must be positive, got {h}");
        ensure!(pi1 > 0.0 && pi1.is_finite(), Validation, "period pi1 must be positive, got {pi1}");
        ensure!(pi2 > 0.0 && pi2.is_finite(), Validation, "period pi2 must be positive, got {pi2}");
        Ok(Self { h, pi1, pi2, x3_lower, x3_upper })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn pi1(&self) -> f64 {
        self.pi1
    }

    pub fn pi2(&self) -> f64 {
        self.pi2
    }

    pub fn x3_lower(&self) -> f64 {
        self.x3_lower
    }

    pub fn x3_upper(&self) -> f64 {
        self.x3_upper
    }

    pub fn midplane(&self) -> f64 {
        0.5 * (self.x3_lower + self.x3_upper)
    }

    /// Same walls and periods with a different height, keeping the lower wall fixed.
    pub fn with_height(&self, h: f64) -> Result<Self> {
        Self::with_walls(self.x3_lower, self.x3_lower + h, self.pi1, self.pi2)
    }

    /// Distance from the lower wall; errors if `x3` lies outside the channel.
    pub fn local(&self, x3: f64) -> Result<f64> {
        let slack = 1e-12 * self.h;
        ensure!(
            x3 >= self.x3_lower - slack && x3 <= self.x3_upper + slack,
            Domain,
            "x3 = {x3} lies outside the walls [{}, {}]",
            self.x3_lower,
            self.x3_upper
        );
        Ok((x3 - self.x3_lower).clamp(0.0, self.h))
    }
}

/// Kinematic viscosity and the NS-alpha length scale (`alpha = 0` is plain NSE).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidParams {
    nu: f64,
    alpha: f64,
}

impl FluidParams {
    pub fn new(nu: f64, alpha: f64) -> Result<Self> {
        ensure!(nu > 0.0 && nu.is_finite(), Validation, "viscosity must be positive, got {nu}");
        ensure!(
            alpha >= 0.0 && alpha.is_finite(),
            Validation,
            "alpha must be nonnegative, got {alpha}"
        );
        Ok(Self { nu, alpha })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Spectral multiplier of `1 - alpha^2 d^2/dx3^2` on sine mode `k`.
pub fn helmholtz_multiplier(alpha: f64, h: f64, k: usize) -> f64 {
    let wave = std::f64::consts::PI * k as f64 / h;
    1.0 + alpha * alpha * wave * wave
}
