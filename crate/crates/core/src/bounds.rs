//! Reynolds number of the time-averaged mean flow, its bound by the pressure
//! drop, the odd reciprocal-square series and a Poincare-inequality checker.

use std::f64::consts::PI;

use crate::averaging::{unit_projection, PressureHistory};
use crate::channel_model::{ChannelGeometry, MeanProfile, SineSpectrum};
use crate::error::{ensure, Result};
use crate::kernel::{decay_rate, KernelConfig};
use crate::numerics::{fd4_first, simpson, uniform_spacing, CompensatedSum};

/// Sine spectrum of `U1 = (1/T) int_0^T <u1(t)> dt`.
///
/// Each mode's history integral `I_k` solves `dI_k/dt = p1 - lambda_k I_k`, so its
/// time average is `(int_0^T p1 dt - I_k(T) + I_k(0)) / (lambda_k T)`, exact for
/// every signal type.
pub fn time_averaged_spectrum(
    geom: &ChannelGeometry,
    nu: f64,
    pressure: &PressureHistory,
    window: f64,
    cfg: &KernelConfig,
) -> Result<SineSpectrum> {
    ensure!(nu > 0.0 && nu.is_finite(), Validation, "viscosity must be positive, got {nu}");
    ensure!(window > 0.0 && window.is_finite(), Domain, "averaging window must be positive, got {window}");
    let (h, pi1) = (geom.h(), geom.pi1());
    let drive = pressure.integral(0.0, window);
    let tol = cfg.tail_tol();
    let coeffs = (1..=cfg.profile_k_max())
        .map(|k| {
            if k % 2 == 0 {
                return 0.0;
            }
            let rate = decay_rate(nu, h, k);
            let change = pressure.history_integral(rate, window, tol) - pressure.history_integral(rate, 0.0, tol);
            -unit_projection(h, k) / pi1 * (drive - change) / (rate * window)
        })
        .collect();
    SineSpectrum::new(*geom, coeffs)
}

/// [`time_averaged_spectrum`] sampled on `grid`; the profile is stamped with `window`.
pub fn time_averaged_profile(
    geom: &ChannelGeometry,
    nu: f64,
    pressure: &PressureHistory,
    window: f64,
    grid: &[f64],
    cfg: &KernelConfig,
) -> Result<MeanProfile> {
    time_averaged_spectrum(geom, nu, pressure, window, cfg)?.sample(grid, window)
}

/// `Re = sqrt(h) ||U1||_{L2} / nu`, with the norm by Simpson quadrature on a
/// uniform wall-to-wall grid of odd size.
pub fn reynolds_number(profile: &MeanProfile, geom: &ChannelGeometry, nu: f64) -> Result<f64> {
    ensure!(nu > 0.0 && nu.is_finite(), Validation, "viscosity must be positive, got {nu}");
    profile.require_wall_anchored(geom)?;
    Ok(geom.h().sqrt() * profile.l2_norm_simpson()? / nu)
}

/// `Re` from the Parseval norm of a spectrum.
pub fn reynolds_number_spectral(spectrum: &SineSpectrum, nu: f64) -> Result<f64> {
    ensure!(nu > 0.0 && nu.is_finite(), Validation, "viscosity must be positive, got {nu}");
    Ok(spectrum.geometry().h().sqrt() * spectrum.l2_norm() / nu)
}

/// `p_bar h^3 / (Pi1 nu^2 pi^2)`.
pub fn reynolds_bound(geom: &ChannelGeometry, nu: f64, p_bar: f64) -> f64 {
    p_bar * geom.h().powi(3) / (geom.pi1() * nu * nu * PI * PI)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReynoldsReport {
    pub u1_time_avg: MeanProfile,
    pub l2_norm: f64,
    pub re: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// Reynolds number of the profile averaged over `[0, window]`, sampled on
/// `grid`, against the bound set by `pressure.p_bar()`.
pub fn reynolds_bound_check(
    geom: &ChannelGeometry,
    nu: f64,
    pressure: &PressureHistory,
    window: f64,
    grid: &[f64],
    cfg: &KernelConfig,
) -> Result<ReynoldsReport> {
    let u1_time_avg = time_averaged_profile(geom, nu, pressure, window, grid, cfg)?;
    let l2_norm = u1_time_avg.l2_norm_simpson()?;
    let re = reynolds_number(&u1_time_avg, geom, nu)?;
    let bound = reynolds_bound(geom, nu, pressure.p_bar());
    Ok(ReynoldsReport { u1_time_avg, l2_norm, re, bound, satisfied: re <= bound })
}

/// `sum_{k=1}^{k_max} 1 / (2k - 1)^2`, which tends to `pi^2 / 8`.
pub fn odd_series_sum(k_max: usize) -> Result<f64> {
    ensure!(k_max >= 1, Domain, "k_max must be at least 1");
    let mut acc = CompensatedSum::new();
    for k in (1..=k_max).rev() {
        let odd = (2 * k - 1) as f64;
        acc += 1.0 / (odd * odd);
    }
    Ok(acc.value())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareReport {
    /// `int (phi')^2`
    pub lhs: f64,
    /// `(1/h^2) int phi^2`
    pub rhs: f64,
    pub satisfied: bool,
}

/// Checks `int (phi')^2 >= (1/h^2) int phi^2` for samples of `phi` on a uniform
/// grid of odd size spanning `[0, h]`, with `phi` zero at both ends.
///
/// The derivative uses fourth-order differences and both integrals Simpson's
/// rule; the inequality is accepted if `lhs >= rhs (1 - grid_tol)`.
pub fn poincare_check(grid: &[f64], values: &[f64], grid_tol: f64) -> Result<PoincareReport> {
    ensure!(grid.len() == values.len(), Validation, "grid and values differ in length");
    ensure!(grid_tol >= 0.0, Validation, "grid_tol must be nonnegative");
    let dx = uniform_spacing(grid).ok_or_else(|| crate::Error::Resolution("grid is not uniform".into()))?;
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (first, last) = (values[0], values[values.len() - 1]);
    ensure!(
        first.abs() <= 1e-12 * scale && last.abs() <= 1e-12 * scale,
        Validation,
        "end values must be zero, got {first} and {last}"
    );
    let h = grid[grid.len() - 1] - grid[0];
    let slope = fd4_first(values, dx)?;
    let lhs = simpson(&slope.iter().map(|d| d * d).collect::<Vec<_>>(), dx)?;
    let rhs = simpson(&values.iter().map(|v| v * v).collect::<Vec<_>>(), dx)? / (h * h);
    Ok(PoincareReport { lhs, rhs, satisfied: lhs >= rhs * (1.0 - grid_tol) })
}
