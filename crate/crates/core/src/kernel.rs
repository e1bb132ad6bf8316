//! The sine-series kernel
//!
//! ```text
//! K(x, t; h) = sum_k 2((-1)^k - 1) / (Pi1 k pi) * exp(-nu (pi k / h)^2 t) * sin(pi k x / h)
//! ```
//!
//! that turns the pressure-drop history into the mean streamwise velocity.
//! Only odd `k` carry a nonzero coefficient, so every sum below runs over odd
//! modes. Pointwise sums are truncated adaptively from a rigorous tail bound and
//! accumulated with compensated summation. Positions `x` are measured from the
//! lower wall, `0 <= x <= h`.
//!
//! At `t = 0` the series is the square wave `-1/Pi1` and converges only
//! conditionally, so pointwise evaluation is refused below
//! [`KernelConfig::t_floor`]. Quantities needed at `t = 0` are computed termwise
//! in closed form (see [`wall_gradient_moment`]).

use std::f64::consts::PI;

use crate::channel_model::ChannelGeometry;
use crate::error::{ensure, Result};
use crate::numerics::{cos_pi, sin_pi, CompensatedSum};

/// Truncation controls for kernel sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    k_max: usize,
    tail_tol: f64,
    t_floor: f64,
    profile_modes: usize,
}

impl KernelConfig {
    pub const DEFAULT_K_MAX: usize = 1 << 20;
    pub const DEFAULT_TAIL_TOL: f64 = 1e-10;
    pub const DEFAULT_PROFILE_MODES: usize = 255;

    /// * `k_max` - hard cap on the mode index of pointwise sums
    /// * `tail_tol` - relative tolerance on the truncated tail
    /// * `t_floor` - smallest time at which `K(x, t)` may be summed pointwise
    /// * `profile_modes` - number of odd modes kept in mean-velocity spectra
    pub fn new(k_max: usize, tail_tol: f64, t_floor: f64, profile_modes: usize) -> Result<Self> {
        ensure!(k_max >= 1, Validation, "k_max must be at least 1");
        ensure!(tail_tol > 0.0 && tail_tol.is_finite(), Validation, "tail_tol must be positive");
        ensure!(t_floor > 0.0 && t_floor.is_finite(), Validation, "t_floor must be positive");
        ensure!(profile_modes >= 1, Validation, "profile_modes must be at least 1");
        Ok(Self { k_max, tail_tol, t_floor, profile_modes })
    }

    /// Defaults for a channel: `t_floor = 1e-6 h^2 / nu`.
    pub fn for_channel(geom: &ChannelGeometry, nu: f64) -> Self {
        Self {
            k_max: Self::DEFAULT_K_MAX,
            tail_tol: Self::DEFAULT_TAIL_TOL,
            t_floor: 1e-6 * geom.h() * geom.h() / nu,
            profile_modes: Self::DEFAULT_PROFILE_MODES,
        }
    }

    pub fn with_tail_tol(mut self, tail_tol: f64) -> Result<Self> {
        ensure!(tail_tol > 0.0 && tail_tol.is_finite(), Validation, "tail_tol must be positive");
        self.tail_tol = tail_tol;
        Ok(self)
    }

    pub fn with_profile_modes(mut self, profile_modes: usize) -> Result<Self> {
        ensure!(profile_modes >= 1, Validation, "profile_modes must be at least 1");
        self.profile_modes = profile_modes;
        Ok(self)
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    pub fn t_floor(&self) -> f64 {
        self.t_floor
    }

    /// Number of odd modes in mean-velocity spectra.
    pub fn profile_modes(&self) -> usize {
        self.profile_modes
    }

    /// Highest mode index kept in mean-velocity spectra (`2 * profile_modes - 1`).
    pub fn profile_k_max(&self) -> usize {
        2 * self.profile_modes - 1
    }
}

/// `2((-1)^k - 1) / (Pi1 k pi)`: zero for even `k`, `-4 / (Pi1 k pi)` for odd `k`.
pub fn mode_coefficient(pi1: f64, k: usize) -> f64 {
    if k % 2 == 0 {
        0.0
    } else {
        -4.0 / (pi1 * k as f64 * PI)
    }
}

/// Decay rate `nu (pi k / h)^2` of mode `k`.
pub fn decay_rate(nu: f64, h: f64, k: usize) -> f64 {
    let wave = PI * k as f64 / h;
    nu * wave * wave
}

fn check_nu(nu: f64) -> Result<()> {
    ensure!(nu > 0.0 && nu.is_finite(), Validation, "viscosity must be positive, got {nu}");
    Ok(())
}

fn check_x(geom: &ChannelGeometry, x: f64) -> Result<()> {
    ensure!(
        (0.0..=geom.h()).contains(&x),
        Domain,
        "kernel position x = {x} outside [0, {}]",
        geom.h()
    );
    Ok(())
}

fn check_t(cfg: &KernelConfig, t: f64) -> Result<()> {
    ensure!(
        t >= cfg.t_floor,
        EvaluationRegime,
        "pointwise kernel evaluation needs t >= t_floor = {:e} (the t -> 0 limit is a square wave); got t = {t:e}",
        cfg.t_floor
    );
    Ok(())
}

/// Bound on `sum_{odd j > k} 4/(Pi1 pi j) exp(-lambda_j t)`.
fn exponential_tail(pi1: f64, nu: f64, h: f64, k: usize, t: f64) -> f64 {
    let next = k + 2;
    let base = decay_rate(nu, h, 1);
    let ratio = (-base * 4.0 * (next + 1) as f64 * t).exp();
    4.0 / (pi1 * PI * next as f64) * (-decay_rate(nu, h, next) * t).exp() / (1.0 - ratio)
}

/// Last odd mode needed so the exponential tail of `K(., t)` is below
/// `tail_tol` times `scale`. Capped at `cfg.k_max`.
fn exponential_cutoff(geom: &ChannelGeometry, nu: f64, t: f64, scale: f64, cfg: &KernelConfig) -> usize {
    let mut k = 1;
    while k + 2 <= cfg.k_max
        && exponential_tail(geom.pi1(), nu, geom.h(), k, t) > cfg.tail_tol * scale
    {
        k += 2;
    }
    k
}

/// `K(x, t)` summed over odd modes `1..=k_last`.
pub fn eval_kernel_fixed(geom: &ChannelGeometry, nu: f64, x: f64, t: f64, k_last: usize) -> f64 {
    let s = x / geom.h();
    let mut acc = CompensatedSum::new();
    for k in (1..=k_last).step_by(2) {
        acc += mode_coefficient(geom.pi1(), k)
            * (-decay_rate(nu, geom.h(), k) * t).exp()
            * sin_pi(k as f64 * s);
    }
    acc.value()
}

/// Result of an adaptively truncated kernel sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSum {
    pub value: f64,
    /// Last (odd) mode included.
    pub k_last: usize,
    /// Upper bound on the magnitude of the discarded tail.
    pub tail_bound: f64,
}

/// `K(x, t)` with adaptive truncation: modes are added until the tail bound
/// drops below `tail_tol * |partial sum|` (or `k_max` is reached).
pub fn eval_kernel_detailed(
    geom: &ChannelGeometry,
    nu: f64,
    x: f64,
    t: f64,
    cfg: &KernelConfig,
) -> Result<KernelSum> {
    check_nu(nu)?;
    check_x(geom, x)?;
    check_t(cfg, t)?;
    let (h, pi1) = (geom.h(), geom.pi1());
    let s = x / h;
    if sin_pi(s) == 0.0 {
        // every odd-mode sine vanishes at the walls
        return Ok(KernelSum { value: 0.0, k_last: 1, tail_bound: 0.0 });
    }
    let mut acc = CompensatedSum::new();
    let mut k = 1;
    loop {
        acc += mode_coefficient(pi1, k) * (-decay_rate(nu, h, k) * t).exp() * sin_pi(k as f64 * s);
        let tail = exponential_tail(pi1, nu, h, k, t);
        if tail <= cfg.tail_tol * acc.value().abs() || k + 2 > cfg.k_max {
            return Ok(KernelSum { value: acc.value(), k_last: k, tail_bound: tail });
        }
        k += 2;
    }
}

/// `K(x, t)` for `0 <= x <= h`, `t >= t_floor`.
pub fn eval_kernel(geom: &ChannelGeometry, nu: f64, x: f64, t: f64, cfg: &KernelConfig) -> Result<f64> {
    Ok(eval_kernel_detailed(geom, nu, x, t, cfg)?.value)
}

/// Termwise `dK/dx` over odd modes `1..=k_last`.
pub fn kernel_dx_termwise(geom: &ChannelGeometry, nu: f64, x: f64, t: f64, k_last: usize) -> f64 {
    let (h, pi1) = (geom.h(), geom.pi1());
    let s = x / h;
    let mut acc = CompensatedSum::new();
    for k in (1..=k_last).step_by(2) {
        acc += mode_coefficient(pi1, k)
            * (-decay_rate(nu, h, k) * t).exp()
            * (PI * k as f64 / h)
            * cos_pi(k as f64 * s);
    }
    acc.value()
}

/// Termwise `dK/dt` over odd modes `1..=k_last`.
pub fn kernel_dt_termwise(geom: &ChannelGeometry, nu: f64, x: f64, t: f64, k_last: usize) -> f64 {
    let (h, pi1) = (geom.h(), geom.pi1());
    let s = x / h;
    let mut acc = CompensatedSum::new();
    for k in (1..=k_last).step_by(2) {
        let rate = decay_rate(nu, h, k);
        acc += -rate * mode_coefficient(pi1, k) * (-rate * t).exp() * sin_pi(k as f64 * s);
    }
    acc.value()
}

/// Termwise `d2K/dx2` over odd modes `1..=k_last`.
pub fn kernel_dxx_termwise(geom: &ChannelGeometry, nu: f64, x: f64, t: f64, k_last: usize) -> f64 {
    let (h, pi1) = (geom.h(), geom.pi1());
    let s = x / h;
    let mut acc = CompensatedSum::new();
    for k in (1..=k_last).step_by(2) {
        let wave = PI * k as f64 / h;
        acc += -wave * wave
            * mode_coefficient(pi1, k)
            * (-decay_rate(nu, h, k) * t).exp()
            * sin_pi(k as f64 * s);
    }
    acc.value()
}

/// Sum of `weight(k) * sin(pi k x / h)` over odd `k`, truncated once the
/// `1/k^3` tail bound `tail_coeff / k^2` falls below `tail_tol * |partial|`.
fn cubic_series(
    geom: &ChannelGeometry,
    x: f64,
    cfg: &KernelConfig,
    weight: impl Fn(usize) -> f64,
    tail_coeff: f64,
) -> f64 {
    let s = x / geom.h();
    if sin_pi(s) == 0.0 {
        // every odd-mode sine vanishes at the walls
        return 0.0;
    }
    let mut acc = CompensatedSum::new();
    let mut k = 1;
    loop {
        acc += weight(k) * sin_pi(k as f64 * s);
        let kf = k as f64;
        // sum over odd j >= k + 2 of j^-3 is at most 1 / (4 k^2)
        let tail = tail_coeff / (4.0 * kf * kf);
        if tail <= cfg.tail_tol * acc.value().abs() || k + 2 > cfg.k_max {
            return acc.value();
        }
        k += 2;
    }
}

/// `int_{-inf}^t K(x, t - tau) dtau`, integrated termwise:
/// `sum_k 2((-1)^k - 1)/(Pi1 k pi) * h^2/(nu (pi k)^2) * sin(pi k x / h)`.
pub fn kernel_time_integral(geom: &ChannelGeometry, nu: f64, x: f64, cfg: &KernelConfig) -> Result<f64> {
    check_nu(nu)?;
    check_x(geom, x)?;
    let (h, pi1) = (geom.h(), geom.pi1());
    let weight = |k: usize| mode_coefficient(pi1, k) * h * h / (nu * (PI * k as f64).powi(2));
    let tail_coeff = 4.0 * h * h / (pi1 * nu * PI.powi(3));
    Ok(cubic_series(geom, x, cfg, weight, tail_coeff))
}

/// Closed form `-x (h - x) / (2 Pi1 nu)` of [`kernel_time_integral`].
pub fn kernel_time_integral_closed(geom: &ChannelGeometry, nu: f64, x: f64) -> Result<f64> {
    check_nu(nu)?;
    check_x(geom, x)?;
    Ok(-x * (geom.h() - x) / (2.0 * geom.pi1() * nu))
}

/// Sine expansion of the parabola: `sum_k 4 h^2 (1 - (-1)^k) / (pi k)^3 sin(pi k x / h)`,
/// which sums to `x (h - x)`.
pub fn parabola_sine_series(geom: &ChannelGeometry, x: f64, cfg: &KernelConfig) -> Result<f64> {
    check_x(geom, x)?;
    let h = geom.h();
    let weight = |k: usize| {
        if k % 2 == 0 {
            0.0
        } else {
            8.0 * h * h / (PI * k as f64).powi(3)
        }
    };
    Ok(cubic_series(geom, x, cfg, weight, 8.0 * h * h / PI.powi(3)))
}

/// Heat-equation residual `|dK/dt - nu d2K/dx2|` estimated two ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatResidual {
    /// From termwise analytic derivatives; zero up to round-off.
    pub analytic: f64,
    /// From central differences of the truncated series; `O(dx^2 + dt^2)`.
    pub finite_difference: f64,
    /// Truncation used for both estimates.
    pub k_last: usize,
}

pub fn kernel_heat_residual(
    geom: &ChannelGeometry,
    nu: f64,
    x: f64,
    t: f64,
    cfg: &KernelConfig,
    dx: f64,
    dt: f64,
) -> Result<HeatResidual> {
    check_nu(nu)?;
    ensure!(dx > 0.0 && dt > 0.0, Domain, "stencil steps must be positive");
    ensure!(
        x - dx > 0.0 && x + dx < geom.h(),
        Domain,
        "stencil [{}, {}] leaves the open interval (0, {})",
        x - dx,
        x + dx,
        geom.h()
    );
    check_t(cfg, t)?;
    check_t(cfg, t - dt)?;
    // one truncation for the whole stencil: a fixed set of modes solves the heat
    // equation exactly, so the difference quotients see only discretisation error
    let scale = eval_kernel_detailed(geom, nu, x, t - dt, cfg)?.value.abs();
    let k_last = exponential_cutoff(geom, nu, t - dt, scale, cfg);

    let d_t = kernel_dt_termwise(geom, nu, x, t, k_last);
    let d_xx = kernel_dxx_termwise(geom, nu, x, t, k_last);
    let analytic = (d_t - nu * d_xx).abs();

    let k = |x: f64, t: f64| eval_kernel_fixed(geom, nu, x, t, k_last);
    let fd_t = (k(x, t + dt) - k(x, t - dt)) / (2.0 * dt);
    let fd_xx = (k(x + dx, t) - 2.0 * k(x, t) + k(x - dx, t)) / (dx * dx);
    Ok(HeatResidual { analytic, finite_difference: (fd_t - nu * fd_xx).abs(), k_last })
}

/// `|dK/dt - nu d2K/dx2|` from termwise derivatives at the adaptive truncation
/// of `K(x, t)`. Needs no stencil, so it is defined up to the walls.
pub fn kernel_heat_residual_termwise(
    geom: &ChannelGeometry,
    nu: f64,
    x: f64,
    t: f64,
    cfg: &KernelConfig,
) -> Result<f64> {
    let k_last = eval_kernel_detailed(geom, nu, x, t, cfg)?.k_last;
    let d_t = kernel_dt_termwise(geom, nu, x, t, k_last);
    let d_xx = kernel_dxx_termwise(geom, nu, x, t, k_last);
    Ok((d_t - nu * d_xx).abs())
}

/// Residual of `dK/dh = -(x/h) dK/dx - (2t/h) dK/dt`, with the left side from a
/// central difference in `h` and the right side termwise. `O(dh^2)`.
pub fn kernel_h_derivative_check(
    geom: &ChannelGeometry,
    nu: f64,
    x: f64,
    t: f64,
    cfg: &KernelConfig,
    dh: f64,
) -> Result<f64> {
    check_nu(nu)?;
    check_t(cfg, t)?;
    let h = geom.h();
    ensure!(x > 0.0 && x < h, Domain, "x = {x} must lie strictly inside (0, {h})");
    ensure!(dh > 0.0 && dh < h - x, Domain, "dh = {dh} must be positive and keep x inside the channel");
    let taller = geom.with_height(h + dh)?;
    let shorter = geom.with_height(h - dh)?;
    // the taller channel decays slowest and sets the truncation
    let scale = eval_kernel_detailed(&taller, nu, x, t, cfg)?.value.abs();
    let k_last = exponential_cutoff(&taller, nu, t, scale, cfg);

    let fd_h = (eval_kernel_fixed(&taller, nu, x, t, k_last)
        - eval_kernel_fixed(&shorter, nu, x, t, k_last))
        / (2.0 * dh);
    let rhs = -(x / h) * kernel_dx_termwise(geom, nu, x, t, k_last)
        - (2.0 * t / h) * kernel_dt_termwise(geom, nu, x, t, k_last);
    Ok((fd_h - rhs).abs())
}

/// Mode-`k` term of the wall average `(1/h) int_0^h Pi1 (x/h) dK/dx(x, 0) dx`,
/// integrated termwise in closed form: `2((-1)^k - 1)^2 / (k pi)^2`.
///
/// Summed over all modes this equals 1; it is the factor multiplying the
/// roughness height in the updated pressure drop.
pub fn wall_gradient_moment(k: usize) -> f64 {
    if k % 2 == 0 {
        0.0
    } else {
        8.0 / (PI * k as f64).powi(2)
    }
}

/// Partial sum of [`wall_gradient_moment`] over modes `1..=k_last`.
pub fn wall_gradient_moment_sum(k_last: usize) -> f64 {
    let mut acc = CompensatedSum::new();
    // smallest terms first
    for k in (1..=k_last).rev() {
        acc += wall_gradient_moment(k);
    }
    acc.value()
}
