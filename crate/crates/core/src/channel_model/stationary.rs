use super::{helmholtz_multiplier, ChannelGeometry, FluidParams, MeanProfile, ProfileSource, SineSpectrum};
use crate::error::{ensure, Error, Result};
use crate::numerics::fd4_second;

/// Stationary NSE profile `b (1 - (x3 - mid)^2 / (h/2)^2)` at one point.
pub fn poiseuille_value(geom: &ChannelGeometry, b: f64, x3: f64) -> Result<f64> {
    let d = geom.local(x3)?;
    let h = geom.h();
    // factored form vanishes exactly at both walls
    Ok(b * 4.0 * d * (h - d) / (h * h))
}

/// Stationary NSE (Poiseuille) profile on `grid`.
pub fn poiseuille_profile(geom: &ChannelGeometry, b: f64, grid: &[f64]) -> Result<MeanProfile> {
    let values = grid.iter().map(|&x| poiseuille_value(geom, b, x)).collect::<Result<Vec<_>>>()?;
    Ok(MeanProfile::new(grid.to_vec(), values, 0.0)?
        .with_source(ProfileSource::Poiseuille { geometry: *geom, b }))
}

/// `cosh(y / alpha) / cosh(h / (2 alpha))` without overflow for `h / alpha` large.
fn cosh_ratio(abs_y: f64, h: f64, alpha: f64) -> f64 {
    ((abs_y - 0.5 * h) / alpha).exp() * (1.0 + (-2.0 * abs_y / alpha).exp())
        / (1.0 + (-h / alpha).exp())
}

fn centered_abs(geom: &ChannelGeometry, x3: f64) -> Result<f64> {
    let d = geom.local(x3)?;
    Ok((d - 0.5 * geom.h()).abs())
}

/// Stationary NS-alpha profile at one point.
pub fn ns_alpha_value(
    geom: &ChannelGeometry,
    alpha: f64,
    a1: f64,
    a2: f64,
    x3: f64,
) -> Result<f64> {
    ensure!(
        alpha > 0.0,
        Domain,
        "the NS-alpha profile needs alpha > 0; use poiseuille_profile for alpha = 0"
    );
    let y = centered_abs(geom, x3)?;
    let h = geom.h();
    Ok(a1 * (1.0 - cosh_ratio(y, h, alpha)) + poiseuille_value(geom, a2, x3)?)
}

/// Stationary NS-alpha profile
/// `a1 (1 - cosh((x3-mid)/alpha) / cosh(h/(2 alpha))) + a2 (1 - (x3-mid)^2/(h/2)^2)` on `grid`.
pub fn ns_alpha_profile(
    geom: &ChannelGeometry,
    fluid: &FluidParams,
    a1: f64,
    a2: f64,
    grid: &[f64],
) -> Result<MeanProfile> {
    let alpha = fluid.alpha();
    let values = grid
        .iter()
        .map(|&x| ns_alpha_value(geom, alpha, a1, a2, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeanProfile::new(grid.to_vec(), values, 0.0)?
        .with_source(ProfileSource::NsAlpha { geometry: *geom, alpha, a1, a2 }))
}

impl ProfileSource {
    fn second_derivative(&self, x3: f64) -> Result<f64> {
        match *self {
            ProfileSource::Poiseuille { geometry, b } => {
                geometry.local(x3)?;
                Ok(-8.0 * b / (geometry.h() * geometry.h()))
            }
            ProfileSource::NsAlpha { geometry, alpha, a1, a2 } => {
                let y = centered_abs(&geometry, x3)?;
                let h = geometry.h();
                Ok(-a1 * cosh_ratio(y, h, alpha) / (alpha * alpha) - 8.0 * a2 / (h * h))
            }
        }
    }

    fn fourth_derivative(&self, x3: f64) -> Result<f64> {
        match *self {
            ProfileSource::Poiseuille { geometry, .. } => {
                geometry.local(x3)?;
                Ok(0.0)
            }
            ProfileSource::NsAlpha { geometry, alpha, a1, .. } => {
                let y = centered_abs(&geometry, x3)?;
                Ok(-a1 * cosh_ratio(y, geometry.h(), alpha) / alpha.powi(4))
            }
        }
    }
}

/// Which derivatives [`stationary_residual_with`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    /// Closed-form derivatives from the profile's [`ProfileSource`].
    Analytic,
    /// Fourth-order finite differences on the samples.
    FiniteDifference,
}

/// How far a sampled profile is from a stationary solution.
///
/// With `v1 = U - alpha^2 U''` (just `U` when `alpha = 0`), a stationary
/// profile has `nu v1''` constant, so `v1` is a quadratic in `x3`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryResidual {
    pub mode: DerivativeMode,
    /// Midrange of `nu v1''` over the grid.
    pub constant: f64,
    /// Max deviation of `nu v1''` from `constant`.
    pub deviation: f64,
    /// Max absolute third forward difference of the `v1` samples.
    pub max_third_difference: f64,
}

/// [`stationary_residual_with`] using analytic derivatives when the profile
/// carries a closed form, finite differences otherwise.
pub fn stationary_residual(profile: &MeanProfile, fluid: &FluidParams) -> Result<StationaryResidual> {
    let mode = if profile.source().is_some() {
        DerivativeMode::Analytic
    } else {
        DerivativeMode::FiniteDifference
    };
    stationary_residual_with(profile, fluid, mode)
}

pub fn stationary_residual_with(
    profile: &MeanProfile,
    fluid: &FluidParams,
    mode: DerivativeMode,
) -> Result<StationaryResidual> {
    let n = profile.len();
    ensure!(
        n >= 7,
        Resolution,
        "stationary residual needs at least 5 interior points, got {} samples",
        n
    );
    let dx = profile.uniform_dx()?;
    let alpha_sq = fluid.alpha() * fluid.alpha();
    let u = profile.values();

    let (v1, v1_second): (Vec<f64>, Vec<f64>) = match mode {
        DerivativeMode::Analytic => {
            let source = profile.source().ok_or_else(|| {
                Error::Validation("analytic derivatives need a closed-form profile".into())
            })?;
            let mut v1 = Vec::with_capacity(n);
            let mut v1_second = Vec::with_capacity(n);
            for (&x, &ux) in profile.grid().iter().zip(u) {
                let u2 = source.second_derivative(x)?;
                let u4 = source.fourth_derivative(x)?;
                v1.push(ux - alpha_sq * u2);
                v1_second.push(u2 - alpha_sq * u4);
            }
            (v1, v1_second)
        }
        DerivativeMode::FiniteDifference => {
            let v1: Vec<f64> = if alpha_sq == 0.0 {
                u.to_vec()
            } else {
                let u2 = fd4_second(u, dx)?;
                u.iter().zip(&u2).map(|(a, b)| a - alpha_sq * b).collect()
            };
            let v1_second = fd4_second(&v1, dx)?;
            (v1, v1_second)
        }
    };

    let scaled: Vec<f64> = v1_second.iter().map(|v| fluid.nu() * v).collect();
    let (lo, hi) = scaled
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let max_third_difference = v1
        .windows(4)
        .map(|w| (w[3] - 3.0 * w[2] + 3.0 * w[1] - w[0]).abs())
        .fold(0.0, f64::max);
    Ok(StationaryResidual {
        mode,
        constant: 0.5 * (lo + hi),
        deviation: 0.5 * (hi - lo),
        max_third_difference,
    })
}

/// The modified pressure `Q(x1, x3) = -(u^2 - alpha^2 (du/dx3)^2)/2 + x1 p1(t) / Pi1`
/// paired with the NS-alpha velocity produced by [`ns_alpha_bridge`].
#[derive(Debug, Clone, PartialEq)]
pub struct BridgePressure {
    mean_velocity: SineSpectrum,
    alpha: f64,
    slope_x1: f64,
}

impl BridgePressure {
    /// Coefficient of `x1`, i.e. `p1(t) / Pi1`.
    pub fn slope_x1(&self) -> f64 {
        self.slope_x1
    }

    /// The `x3`-dependent quadratic part.
    pub fn quadratic_at(&self, x3: f64) -> Result<f64> {
        let u = self.mean_velocity.eval(x3)?;
        let du = self.mean_velocity.derivative(x3)?;
        Ok(-0.5 * (u * u - self.alpha * self.alpha * du * du))
    }

    pub fn eval(&self, x1: f64, x3: f64) -> Result<f64> {
        Ok(self.quadratic_at(x3)? + x1 * self.slope_x1)
    }

    /// `dQ/dx3 = -du/dx3 (u - alpha^2 d2u/dx3^2)`.
    pub fn d_dx3(&self, x3: f64) -> Result<f64> {
        let u = self.mean_velocity.eval(x3)?;
        let du = self.mean_velocity.derivative(x3)?;
        let d2u = self.mean_velocity.second_derivative(x3)?;
        Ok(-(u * du - self.alpha * self.alpha * du * d2u))
    }

    /// Quadratic part sampled on `grid`.
    pub fn sample_quadratic(&self, grid: &[f64]) -> Result<Vec<f64>> {
        grid.iter().map(|&x| self.quadratic_at(x)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BridgeOutput {
    /// `V = (1 - alpha^2 d^2/dx3^2) <u1>`, mode by mode.
    pub v: SineSpectrum,
    pub q: BridgePressure,
}

/// Maps an averaged NSE profile to the NS-alpha pair `(V, Q)`.
pub fn ns_alpha_bridge(profile: &SineSpectrum, fluid: &FluidParams, p1_at_t: f64) -> Result<BridgeOutput> {
    ensure!(p1_at_t.is_finite(), Validation, "pressure drop must be finite");
    let alpha = fluid.alpha();
    let h = profile.geometry().h();
    let v = profile.map_modes(|k, c| c * helmholtz_multiplier(alpha, h, k));
    let q = BridgePressure {
        mean_velocity: profile.clone(),
        alpha,
        slope_x1: p1_at_t / profile.geometry().pi1(),
    };
    Ok(BridgeOutput { v, q })
}
