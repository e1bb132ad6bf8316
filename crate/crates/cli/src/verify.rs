//! The invariant suite behind `alpha-channel verify`.
//!
//! Every check is deterministic: random inputs come from a ChaCha8 stream
//! seeded by `runs.verify.seed`, and nothing depends on wall-clock time.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use alpha_channel::averaging::{
    contraction_decay_check, divergence_constraint_check, duhamel_mean_velocity, duhamel_spectrum,
    poiseuille_from_drop, poiseuille_spectrum, spectral_evolve, Component, GriddedField, PeriodicField,
    PressureHistory,
};
use alpha_channel::bounds::{odd_series_sum, poincare_check, reynolds_bound_check, reynolds_number, reynolds_number_spectral};
use alpha_channel::channel_model::{
    helmholtz_multiplier, ns_alpha_bridge, ns_alpha_profile, ns_alpha_value, poiseuille_value, stationary_residual_with,
    uniform_grid, ChannelGeometry, DerivativeMode, FluidParams, SineSpectrum,
};
use alpha_channel::kernel::{
    eval_kernel, eval_kernel_fixed, kernel_h_derivative_check, kernel_heat_residual, kernel_heat_residual_termwise,
    kernel_time_integral, kernel_time_integral_closed, mode_coefficient, KernelConfig,
};
use alpha_channel::roughness::{
    alpha_from_spec, alpha_from_volume, apply_alpha_update, matching_check, matching_regime_holds, RoughnessSpec,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Model;
use crate::csv::{Cell, Table};
use crate::error::CliError;
use crate::Style;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
    pub bound: Bound,
}

impl Check {
    fn at_most(name: &'static str, value: f64, limit: f64) -> Self {
        Self { name, value, limit, bound: Bound::AtMost }
    }

    fn at_least(name: &'static str, value: f64, limit: f64) -> Self {
        Self { name, value, limit, bound: Bound::AtLeast }
    }

    /// A count of failed cases, which must be zero.
    fn failures(name: &'static str, count: usize) -> Self {
        Self::at_most(name, count as f64, 0.0)
    }

    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost => self.value <= self.limit,
            Bound::AtLeast => self.value >= self.limit,
        }
    }

    pub fn line(&self, style: Style) -> String {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        let op = match self.bound {
            Bound::AtMost => "max",
            Bound::AtLeast => "min",
        };
        format!("{}  {} value={:.3e} {op}={:.3e}", style.verdict(self.passed(), tag), self.name, self.value, self.limit)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn order(coarse: f64, fine: f64, ratio: f64) -> f64 {
    (coarse / fine).ln() / ratio.ln()
}

fn l2_gap(a: &SineSpectrum, b: &SineSpectrum) -> alpha_channel::Result<f64> {
    Ok(a.added(&b.scaled(-1.0))?.l2_norm())
}

/// Runs every check. Errors from the library abort the suite.
pub fn run_checks(model: &Model) -> Result<Vec<Check>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(model.config.runs.verify.seed);
    let mut out = Vec::new();
    kernel_checks(model, &mut rng, &mut out)?;
    stationary_checks(model, &mut rng, &mut out)?;
    mean_flow_checks(model, &mut rng, &mut out)?;
    bounds_checks(&mut rng, &mut out)?;
    roughness_checks(model, &mut rng, &mut out)?;
    Ok(out)
}

fn kernel_checks(model: &Model, rng: &mut ChaCha8Rng, out: &mut Vec<Check>) -> alpha_channel::Result<()> {
    let (g, nu, cfg) = (&model.geometry, model.nu(), &model.kernel);
    let tol = &model.config.tolerance;
    let h = g.h();
    let tau = h * h / nu;
    let random_point = |rng: &mut ChaCha8Rng| (rng.gen_range(0.0..h), tau * 10f64.powf(rng.gen_range(-4.0..0.3)));

    let mut worst = 0.0f64;
    for m in 1..=40 {
        let (x, t) = random_point(rng);
        let odd = 2 * m - 1;
        worst = worst.max((eval_kernel_fixed(g, nu, x, t, odd) - eval_kernel_fixed(g, nu, x, t, odd + 1)).abs());
        worst = worst.max(mode_coefficient(g.pi1(), 2 * m).abs());
    }
    out.push(Check::at_most("kernel.even_modes_vanish", worst, 0.0));

    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (x, t) = random_point(rng);
        let (a, b) = (eval_kernel(g, nu, x, t, cfg)?, eval_kernel(g, nu, h - x, t, cfg)?);
        worst = worst.max((a - b).abs() / a.abs().max(1.0));
    }
    out.push(Check::at_most("kernel.midplane_symmetry", worst, 1e-12));

    let mut worst = 0.0f64;
    for i in 0..=100 {
        let x = h * i as f64 / 100.0;
        worst = worst.max(rel(kernel_time_integral(g, nu, x, cfg)?, kernel_time_integral_closed(g, nu, x)?));
    }
    out.push(Check::at_most("kernel.time_integral_vs_closed_form", worst, tol.kernel_integral));

    let mut worst = 0.0f64;
    for _ in 0..30 {
        let (x, t) = random_point(rng);
        let c = 10f64.powf(rng.gen_range(-1.0..1.0));
        let scaled = ChannelGeometry::with_walls(g.x3_lower(), g.x3_upper(), c * g.pi1(), g.pi2())?;
        let (a, b) = (eval_kernel(&scaled, nu, x, t, cfg)? * c, eval_kernel(g, nu, x, t, cfg)?);
        worst = worst.max((a - b).abs() / b.abs().max(1.0));
    }
    out.push(Check::at_most("kernel.inverse_period_scaling", worst, 1e-12));

    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (x, t) = random_point(rng);
        worst = worst.max(kernel_heat_residual_termwise(g, nu, x, t, cfg)?);
    }
    out.push(Check::at_most("kernel.heat_equation_termwise", worst, tol.heat_residual));

    let steps = [(0.02, 0.004), (0.01, 0.002), (0.005, 0.001)];
    let fd: Vec<f64> = steps
        .iter()
        .map(|&(dx, dt)| kernel_heat_residual(g, nu, 0.5 * h, 0.1 * tau, cfg, dx * h, dt * tau).map(|r| r.finite_difference))
        .collect::<alpha_channel::Result<_>>()?;
    let observed = order(fd[0], fd[1], 2.0).min(order(fd[1], fd[2], 2.0));
    out.push(Check::at_least("kernel.heat_equation_fd_order", observed, 1.9));

    let coarse = kernel_h_derivative_check(g, nu, 0.5 * h, 0.2 * tau, cfg, 1e-3 * h)?;
    let fine = kernel_h_derivative_check(g, nu, 0.5 * h, 0.2 * tau, cfg, 5e-4 * h)?;
    out.push(Check::at_least("kernel.h_derivative_order", order(coarse, fine, 2.0), 1.9));
    Ok(())
}

fn stationary_checks(model: &Model, rng: &mut ChaCha8Rng, out: &mut Vec<Check>) -> alpha_channel::Result<()> {
    let g = &model.geometry;
    let fluid = FluidParams::new(model.nu(), if model.fluid.alpha() > 0.0 { model.fluid.alpha() } else { 0.1 })?;
    let alpha = fluid.alpha();

    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (a1, a2) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let a = rng.gen_range(0.01..2.0) * g.h();
        for x in [g.x3_lower(), g.x3_upper()] {
            worst = worst.max(ns_alpha_value(g, a, a1, a2, x)?.abs() / (a1.abs() + a2.abs()));
        }
    }
    out.push(Check::at_most("ns_alpha.wall_values", worst, 1e-15));

    let run = &model.config.runs.profiles;
    let grid = uniform_grid(g, 257)?;
    let profile = ns_alpha_profile(g, &fluid, run.a1, run.a2, &grid)?;
    let r = stationary_residual_with(&profile, &fluid, DerivativeMode::Analytic)?;
    out.push(Check::at_most("ns_alpha.third_differences", r.max_third_difference, 1e-8));
    let scale = r.constant.abs().max(1.0);
    out.push(Check::at_most("ns_alpha.constant_second_derivative", r.deviation / scale, 1e-8));

    // finite-difference derivatives: the third differences shrink at fourth
    // order, accepted at 95% of it as for the second-order checks
    let third = |n: usize| -> alpha_channel::Result<f64> {
        let grid = uniform_grid(g, n)?;
        let p = ns_alpha_profile(g, &fluid, run.a1, run.a2, &grid)?;
        Ok(stationary_residual_with(&p, &fluid, DerivativeMode::FiniteDifference)?.max_third_difference)
    };
    let (coarse, fine) = (third(129)?, third(257)?);
    out.push(Check::at_least("ns_alpha.fd_third_difference_order", order(coarse, fine, 2.0), 3.8));

    let mut worst = 0.0f64;
    for _ in 0..50 {
        let a2 = rng.gen_range(-5.0..5.0);
        let x = rng.gen_range(g.x3_lower()..=g.x3_upper());
        worst = worst.max((ns_alpha_value(g, alpha, 0.0, a2, x)? - poiseuille_value(g, a2, x)?).abs());
    }
    out.push(Check::at_most("ns_alpha.zero_a1_is_poiseuille", worst, 0.0));

    let mut worst = 0.0f64;
    for _ in 0..100 {
        let coeffs: Vec<f64> = (0..63).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u = SineSpectrum::new(*g, coeffs)?;
        let v = ns_alpha_bridge(&u, &fluid, -1.0)?.v;
        for k in 1..=63 {
            worst = worst.max(rel(v.coefficient(k) / u.coefficient(k), helmholtz_multiplier(alpha, g.h(), k)));
        }
    }
    out.push(Check::at_most("ns_alpha.bridge_mode_multiplier", worst, 1e-12));
    Ok(())
}

fn random_field(rng: &mut ChaCha8Rng, geom: ChannelGeometry, admissible: bool) -> alpha_channel::Result<PeriodicField> {
    let mut modes = BTreeMap::new();
    let z = Complex64::new(0.0, 0.0);
    let c = |rng: &mut ChaCha8Rng| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    for k1 in 0..=2i64 {
        for k2 in -2..=2i64 {
            if k1 == 0 && k2 < 0 {
                continue;
            }
            for k3 in 1..=3u32 {
                let u = if !admissible {
                    [c(rng), c(rng), c(rng)]
                } else if k2 != 0 {
                    let u1 = c(rng);
                    [u1, -(k1 as f64 * geom.pi2()) / (k2 as f64 * geom.pi1()) * u1, z]
                } else if k1 == 0 {
                    [c(rng), c(rng), z]
                } else {
                    [z, c(rng), z]
                };
                let u = if k1 == 0 && k2 == 0 { u.map(|v| Complex64::new(v.re, 0.0)) } else { u };
                modes.insert((k1, k2, k3), u);
                if k1 != 0 || k2 != 0 {
                    modes.insert((-k1, -k2, k3), u.map(|v| v.conj()));
                }
            }
        }
    }
    PeriodicField::new(geom, modes)
}

fn mean_flow_checks(model: &Model, rng: &mut ChaCha8Rng, out: &mut Vec<Check>) -> alpha_channel::Result<()> {
    let (g, nu, cfg) = (&model.geometry, model.nu(), &model.kernel);
    let h = g.h();
    let tau = h * h / nu;
    let tol = model.config.tolerance.evolve;

    // piecewise-linear drop, held at its first sample before t = 0
    let values: Vec<f64> = (0..=200).map(|_| -rng.gen_range(0.2..3.0)).collect();
    let dt = 0.02 * tau;
    let p = PressureHistory::sampled(0.0, dt, values.clone(), 3.0)?;
    let (mu, _) = poiseuille_from_drop(g, nu, values[0], &[g.midplane()])?;
    let start = poiseuille_spectrum(g, mu, cfg.profile_k_max())?;
    let mut worst = 0.0f64;
    for t in [0.5 * tau, 2.0 * tau] {
        let oracle = spectral_evolve(g, nu, &p, &start, 0.0, t, dt / 2.0)?;
        let duhamel = duhamel_spectrum(g, nu, &p, t, cfg)?;
        worst = worst.max(l2_gap(&duhamel, &oracle)? / duhamel.l2_norm());
    }
    out.push(Check::at_most("mean_flow.duhamel_vs_oracle_piecewise_linear", worst, tol));

    let p = PressureHistory::sinusoid(-1.0, 0.5, 2.0 * PI / tau, 0.0, 1.5)?;
    let burn_in = (1e8f64).ln() * tau / (PI * PI);
    let rest = SineSpectrum::zeros(*g, cfg.profile_k_max())?;
    let oracle = spectral_evolve(g, nu, &p, &rest, 0.0, burn_in, 2.5e-4 * tau)?;
    let duhamel = duhamel_spectrum(g, nu, &p, burn_in, cfg)?;
    out.push(Check::at_most(
        "mean_flow.duhamel_vs_oracle_sinusoid",
        l2_gap(&duhamel, &oracle)? / duhamel.l2_norm(),
        tol,
    ));

    let p = PressureHistory::constant(-2.0, 2.0)?;
    let init = SineSpectrum::new(*g, (0..cfg.profile_k_max()).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
    let settled = spectral_evolve(g, nu, &p, &init, 0.0, 4.0 * tau, 0.05 * tau)?;
    let (mu, _) = poiseuille_from_drop(g, nu, -2.0, &[g.midplane()])?;
    let exact = poiseuille_spectrum(g, mu, cfg.profile_k_max())?;
    let worst = (1..=exact.k_max()).map(|k| (settled.coefficient(k) - exact.coefficient(k)).abs()).fold(0.0, f64::max);
    out.push(Check::at_most("mean_flow.steady_state_is_poiseuille", worst, 1e-9 * mu.max(1.0) * h * h));

    let peak = duhamel_mean_velocity(g, nu, &p, 0.0, &[g.midplane()], cfg)?.values()[0];
    let expected = mu * h * h / 4.0;
    out.push(Check::at_most("mean_flow.nonzero_steady_peak", rel(peak, expected), 1e-6));

    let zero = PressureHistory::zero_unchecked();
    let u2 = SineSpectrum::new(*g, (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
    let still = SineSpectrum::zeros(*g, 8)?;
    let r = contraction_decay_check(g, nu, &zero, &u2, &still, 2.0 * tau)?;
    out.push(Check::at_least("mean_flow.spanwise_mean_decay_rate", r.fitted_rate / r.poincare_rate, 1.0));
    let later = spectral_evolve(g, nu, &zero, &u2, 0.0, 4.0 * tau, 0.1 * tau)?;
    out.push(Check::at_most("mean_flow.spanwise_mean_vanishes", later.l2_norm() / u2.l2_norm(), 1e-15));

    let p = PressureHistory::sinusoid(-1.0, 0.5, 2.0 * PI / tau, 0.3, 1.5)?;
    let a = SineSpectrum::new(*g, (0..31).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
    let b = SineSpectrum::new(*g, (0..31).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
    let r = contraction_decay_check(g, nu, &p, &a, &b, tau)?;
    out.push(Check::at_least("mean_flow.contraction_beats_poincare_rate", r.fitted_rate / r.poincare_rate, 1.0));
    out.push(Check::at_most("mean_flow.contraction_slowest_mode_rate", rel(r.fitted_rate, r.slowest_mode_rate), 0.01));

    let mut worst = 0.0f64;
    for _ in 0..10 {
        let a: Vec<f64> = (0..30).map(|_| rng.gen_range(0.1..2.0)).collect();
        let b: Vec<f64> = (0..30).map(|_| rng.gen_range(0.1..2.0)).collect();
        let t = rng.gen_range(0.0..0.5) * tau;
        let step = 0.02 * tau;
        let pa = PressureHistory::sampled(0.0, step, a.iter().map(|v| -v).collect(), 2.0)?;
        let pb = PressureHistory::sampled(0.0, step, b.iter().map(|v| -v).collect(), 2.0)?;
        let ps = PressureHistory::sampled(0.0, step, a.iter().zip(&b).map(|(x, y)| -x - y).collect(), 4.0)?;
        let sa = duhamel_spectrum(g, nu, &pa, t, cfg)?;
        let sb = duhamel_spectrum(g, nu, &pb, t, cfg)?;
        let ss = duhamel_spectrum(g, nu, &ps, t, cfg)?;
        worst = worst.max(l2_gap(&sa.added(&sb)?, &ss)? / ss.l2_norm());
    }
    out.push(Check::at_most("mean_flow.linear_in_pressure", worst, 1e-12));

    let field_geom = ChannelGeometry::with_walls(g.x3_lower(), g.x3_upper(), 2.0 * g.pi1(), 3.0 * g.pi2())?;
    let (mut div, mut normal, mut misflagged) = (0.0f64, 0.0f64, 0usize);
    for _ in 0..10 {
        let f = random_field(rng, field_geom, true)?;
        if !divergence_constraint_check(&f).admissible(1e-12) {
            misflagged += 1;
        }
        normal = normal.max(f.modes().values().map(|u| u[2].norm()).fold(0.0, f64::max));
        for _ in 0..20 {
            let x1 = rng.gen_range(0.0..field_geom.pi1());
            let x2 = rng.gen_range(0.0..field_geom.pi2());
            let x3 = rng.gen_range(g.x3_lower()..g.x3_upper());
            div = div.max(f.divergence(x1, x2, x3)?.abs());
        }
        let bad = random_field(rng, field_geom, false)?;
        let report = divergence_constraint_check(&bad);
        let predicted = bad
            .modes()
            .iter()
            .map(|(&(_, _, k3), u)| u[2].norm() * k3 as f64 * PI / h)
            .fold(0.0, f64::max);
        if report.normal != predicted || report.tangential <= 0.0 || report.admissible(1e-12) {
            misflagged += 1;
        }
    }
    out.push(Check::at_most("mean_flow.admissible_fields_divergence_free", div, 1e-10));
    out.push(Check::at_most("mean_flow.admissible_fields_no_normal_mean", normal, 0.0));
    out.push(Check::failures("mean_flow.constraint_violations_flagged", misflagged));

    let x3 = uniform_grid(&field_geom, 11)?;
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let f = random_field(rng, field_geom, false)?;
        for comp in [Component::U1, Component::U2, Component::U3] {
            let spectral = f.reynolds_average(comp, &x3)?;
            let gridded = GriddedField::from_fn(field_geom, 9, 9, x3.clone(), |a, b, c| f.sample(comp, a, b, c))?;
            for (s, q) in spectral.values().iter().zip(gridded.reynolds_average()?.values()) {
                worst = worst.max((s - q).abs());
            }
        }
    }
    out.push(Check::at_most("mean_flow.plane_average_matches_quadrature", worst, 1e-10));
    Ok(())
}

// Natural cubic spline through (knots[i], values[i]), sampled at x.
fn natural_spline(knots: &[f64], values: &[f64], x: &[f64]) -> Vec<f64> {
    let n = knots.len() - 1;
    let hs: Vec<f64> = (0..n).map(|i| knots[i + 1] - knots[i]).collect();
    let mut m = vec![0.0; n + 1];
    if n > 1 {
        // Thomas algorithm on the interior second derivatives
        let mut diag: Vec<f64> = (1..n).map(|i| 2.0 * (hs[i - 1] + hs[i])).collect();
        let mut rhs: Vec<f64> = (1..n)
            .map(|i| 6.0 * ((values[i + 1] - values[i]) / hs[i] - (values[i] - values[i - 1]) / hs[i - 1]))
            .collect();
        for i in 1..n - 1 {
            let w = hs[i] / diag[i - 1];
            diag[i] -= w * hs[i];
            rhs[i] -= w * rhs[i - 1];
        }
        for i in (0..n - 1).rev() {
            let upper = if i + 1 < n - 1 { hs[i + 1] * m[i + 2] } else { 0.0 };
            m[i + 1] = (rhs[i] - upper) / diag[i];
        }
    }
    x.iter()
        .map(|&xv| {
            let i = knots.partition_point(|&k| k <= xv).clamp(1, n) - 1;
            let hi = hs[i];
            let (a, b) = (knots[i + 1] - xv, xv - knots[i]);
            m[i] * a.powi(3) / (6.0 * hi)
                + m[i + 1] * b.powi(3) / (6.0 * hi)
                + (values[i] - m[i] * hi * hi / 6.0) * a / hi
                + (values[i + 1] - m[i + 1] * hi * hi / 6.0) * b / hi
        })
        .collect()
}

fn bounds_checks(rng: &mut ChaCha8Rng, out: &mut Vec<Check>) -> alpha_channel::Result<()> {
    let mut violations = 0;
    for _ in 0..500 {
        let g = ChannelGeometry::new(rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), 1.0)?;
        let nu = rng.gen_range(0.5..2.0);
        let cfg = KernelConfig::for_channel(&g, nu).with_profile_modes(64)?;
        let p_bar = rng.gen_range(0.1..10.0);
        let n = rng.gen_range(2..40);
        let values: Vec<f64> = (0..n).map(|_| -p_bar * rng.gen_range(0.01..=1.0)).collect();
        let p = PressureHistory::sampled(0.0, rng.gen_range(0.01..0.2), values, p_bar)?;
        let window = rng.gen_range(0.1..5.0);
        let r = reynolds_bound_check(&g, nu, &p, window, &uniform_grid(&g, 129)?, &cfg)?;
        if !r.satisfied {
            violations += 1;
        }
    }
    out.push(Check::failures("bounds.reynolds_bound_random_histories", violations));

    let g = ChannelGeometry::new(1.0, 1.0, 1.0)?;
    let cfg = KernelConfig::for_channel(&g, 1.0);
    let grid = uniform_grid(&g, 257)?;
    let r = reynolds_bound_check(&g, 1.0, &PressureHistory::constant(-2.0, 2.0)?, 1.0, &grid, &cfg)?;
    out.push(Check::at_most("bounds.constant_drop_reynolds_number", rel(r.re, 1.0 / 30f64.sqrt()), 1e-6));
    out.push(Check::failures("bounds.constant_drop_within_bound", usize::from(!(r.re <= 2.0 / (PI * PI)))));

    let wide = ChannelGeometry::new(2.0, 1.0, 1.0)?;
    let grid = uniform_grid(&wide, 257)?;
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let coeffs: Vec<f64> = (1..=20).map(|k| rng.gen_range(-1.0..1.0) / (k as f64).powi(2)).collect();
        let s = SineSpectrum::new(wide, coeffs)?;
        let quad = reynolds_number(&s.sample(&grid, 0.0)?, &wide, 1.0)?;
        worst = worst.max(rel(quad, reynolds_number_spectral(&s, 1.0)?));
    }
    out.push(Check::at_most("bounds.parseval_vs_quadrature", worst, 1e-8));

    let limit = PI * PI / 8.0;
    let mut prev = 0.0;
    let mut non_monotone = 0;
    for k in [1, 2, 5, 10, 100, 1000, 10_000, 100_000] {
        let s = odd_series_sum(k)?;
        if !(s > prev && s < limit) {
            non_monotone += 1;
        }
        prev = s;
    }
    out.push(Check::failures("bounds.odd_series_monotone_below_limit", non_monotone));
    out.push(Check::at_most("bounds.odd_series_at_one_million", (odd_series_sum(1_000_000)? - limit).abs(), 5e-7));

    let g = ChannelGeometry::new(1.3, 1.0, 1.0)?;
    let grid = uniform_grid(&g, 513)?;
    let mut failed = 0;
    for _ in 0..100 {
        let n = rng.gen_range(3..12);
        let knots: Vec<f64> = (0..=n).map(|i| 1.3 * i as f64 / n as f64).collect();
        let mut values: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        values[0] = 0.0;
        values[n] = 0.0;
        if !poincare_check(&grid, &natural_spline(&knots, &values, &grid), 1e-3)?.satisfied {
            failed += 1;
        }
    }
    out.push(Check::failures("bounds.poincare_random_splines", failed));
    let g = ChannelGeometry::new(1.0, 1.0, 1.0)?;
    let grid = uniform_grid(&g, 257)?;
    let sine: Vec<f64> = grid.iter().map(|x| (PI * x).sin()).collect();
    let r = poincare_check(&grid, &sine, 0.0)?;
    out.push(Check::at_most("bounds.poincare_sine_ratio", rel(r.lhs / r.rhs, PI * PI), 1e-8));
    Ok(())
}

fn roughness_checks(model: &Model, rng: &mut ChaCha8Rng, out: &mut Vec<Check>) -> alpha_channel::Result<()> {
    let spec = &model.roughness;
    let g = *spec.geometry();
    let h = g.h();

    let mut mismatches = 0;
    let mut in_regime = 0;
    for ratio in [1e-2, 1e-3, 1e-4] {
        let s = RoughnessSpec::new(g, spec.c1(), ratio * h, spec.delta1(), spec.delta2(), spec.r1_0(), spec.r2_0(), spec.n1(), spec.n2(), 200)?;
        for k in (1..=99).step_by(2) {
            if matching_regime_holds(&s, k) {
                in_regime += 1;
                if matching_check(&s, k, 200)? != [k] {
                    mismatches += 1;
                }
            }
        }
    }
    out.push(Check::failures("roughness.matching_singletons_in_regime", mismatches));
    out.push(Check::at_least("roughness.matching_regime_cases", in_regime as f64, 1.0));

    let mut worst = 0.0f64;
    for n in 1..=spec.n_max() {
        let gen = spec.generation(n)?;
        worst = worst.max(rel(gen.volume * (n as f64).powi(4), spec.vol1()));
        worst = worst.max(rel(gen.effect * gen.volume, spec.c1()));
    }
    out.push(Check::at_most("roughness.generation_identities", worst, 1e-14));

    let modes = 25;
    let (mut lin, mut trip) = (0.0f64, 0.0f64);
    for _ in 0..30 {
        let a = SineSpectrum::new(g, (0..modes).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
        let b = SineSpectrum::new(g, (0..modes).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
        let c = rng.gen_range(-3.0..3.0);
        let ta = apply_alpha_update(&a, spec)?;
        let tb = apply_alpha_update(&b, spec)?.output;
        let sum = apply_alpha_update(&a.scaled(c).added(&b)?, spec)?.output;
        let combo = ta.output.scaled(c).added(&tb)?;
        for k in 1..=modes {
            lin = lin.max((sum.coefficient(k) - combo.coefficient(k)).abs() / (1.0 + combo.coefficient(k).abs()));
            let back = ta.output.coefficient(k) / helmholtz_multiplier(ta.alpha, h, k);
            trip = trip.max((back - a.coefficient(k)).abs());
        }
    }
    out.push(Check::at_most("roughness.update_is_linear", lin, 1e-12));
    out.push(Check::at_most("roughness.update_round_trip", trip, 1e-12));

    out.push(Check::at_most("roughness.alpha_formulas_agree", rel(alpha_from_volume(spec), alpha_from_spec(spec)), 1e-12));
    let unit = ChannelGeometry::new(1.0, 2.0, 2.0)?;
    let example = RoughnessSpec::new(unit, PI * PI, 1e-3, 0.5, 0.5, 0.05, 0.05, 1, 1, 10)?;
    out.push(Check::at_most("roughness.alpha_unit_example", (alpha_from_spec(&example) - 1.0).abs(), 1e-15));

    let k_top = model.kernel.profile_k_max();
    let up = apply_alpha_update(&SineSpectrum::new(g, vec![1.0; k_top])?, spec)?;
    let worst =
        (1..=k_top).map(|k| rel(up.multipliers[k - 1], helmholtz_multiplier(up.alpha, h, k))).fold(0.0, f64::max);
    out.push(Check::at_most("roughness.multiplier_is_helmholtz_symbol", worst, 1e-12));

    let fluid = FluidParams::new(model.nu(), up.alpha)?;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let u = SineSpectrum::new(g, (0..63).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
        let cascade = apply_alpha_update(&u, spec)?.output;
        let bridge = ns_alpha_bridge(&u, &fluid, -1.0)?.v;
        for k in 1..=63 {
            worst = worst.max(rel(cascade.coefficient(k), bridge.coefficient(k)));
        }
    }
    out.push(Check::at_most("roughness.cascade_equals_bridge", worst, 1e-12));
    Ok(())
}

/// Renders the suite: one line per check and a closing summary.
pub fn render(checks: &[Check], style: Style) -> String {
    let mut s = String::new();
    for c in checks {
        s.push_str(&c.line(style));
        s.push('\n');
    }
    let passed = checks.iter().filter(|c| c.passed()).count();
    s.push_str(&format!("summary: {passed}/{} checks passed\n", checks.len()));
    s
}

pub fn table(checks: &[Check]) -> Table {
    let mut t = Table::new(&["check", "value", "limit", "bound", "passed"]);
    for c in checks {
        let bound = match c.bound {
            Bound::AtMost => "max",
            Bound::AtLeast => "min",
        };
        t.push(vec![c.name.into(), c.value.into(), c.limit.into(), Cell::from(bound), c.passed().into()]);
    }
    t
}
