//! One function per subcommand. Each returns the CSV table, a human-readable
//! report for stdout and, if a self-check exceeded its tolerance, the reason.

use std::f64::consts::PI;

use alpha_channel::averaging::{
    duhamel_mean_velocity, duhamel_spectrum, poiseuille_from_drop, spectral_evolve, PressureSignal,
};
use alpha_channel::bounds::reynolds_bound_check;
use alpha_channel::channel_model::{
    helmholtz_multiplier, ns_alpha_profile, poiseuille_profile, stationary_residual, uniform_grid, SineSpectrum,
    StationaryResidual,
};
use alpha_channel::kernel::{eval_kernel, kernel_heat_residual_termwise, kernel_time_integral, kernel_time_integral_closed};
use alpha_channel::roughness::{alpha_from_spec, apply_alpha_update, matching_check};

use crate::config::Model;
use crate::csv::{Cell, Table};
use crate::error::CliError;
use crate::Style;

/// Third differences of `v1 = U - alpha^2 U''` above this flag a profile as
/// not stationary.
pub const THIRD_DIFFERENCE_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub report: String,
    pub breach: Option<String>,
}

impl Outcome {
    fn new(table: Table, report: String, breach: Option<String>) -> Self {
        Self { table, report, breach }
    }
}

fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn relative_gap(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

pub fn kernel(model: &Model) -> Result<Outcome, CliError> {
    let run = &model.config.runs.kernel;
    let (geom, nu, cfg) = (&model.geometry, model.nu(), &model.kernel);
    let tol = &model.config.tolerance;
    if run.x_points < 2 {
        return Err(validation(format!("runs.kernel.x_points must be at least 2, got {}", run.x_points)));
    }
    for &t in &run.times {
        if !(t >= cfg.t_floor()) || !t.is_finite() {
            return Err(validation(format!(
                "t = {t} is below t_floor = {:e}; the kernel series is only evaluated for t >= t_floor",
                cfg.t_floor()
            )));
        }
    }
    let h = geom.h();
    let mut table =
        Table::new(&["x", "t", "K", "time_integral_series", "time_integral_closed", "heat_residual"]);
    let (mut worst_integral, mut worst_heat) = (0.0f64, 0.0f64);
    if !run.times.is_empty() {
        for i in 0..run.x_points {
            let x = if i + 1 == run.x_points { h } else { h * i as f64 / (run.x_points - 1) as f64 };
            let series = kernel_time_integral(geom, nu, x, cfg)?;
            let closed = kernel_time_integral_closed(geom, nu, x)?;
            worst_integral = worst_integral.max(relative_gap(series, closed));
            for &t in &run.times {
                let k = eval_kernel(geom, nu, x, t, cfg)?;
                let residual = kernel_heat_residual_termwise(geom, nu, x, t, cfg)?;
                worst_heat = worst_heat.max(residual);
                table.push(vec![x.into(), t.into(), k.into(), series.into(), closed.into(), residual.into()]);
            }
        }
    }
    let report = format!(
        "kernel: {} rows, max relative time-integral gap {worst_integral:.3e} (limit {:.3e}), \
         max heat residual {worst_heat:.3e} (limit {:.3e})\n",
        table.len(),
        tol.kernel_integral,
        tol.heat_residual
    );
    let breach = if worst_integral > tol.kernel_integral {
        Some(format!("time integral gap {worst_integral:.3e} exceeds {:.3e}", tol.kernel_integral))
    } else if worst_heat > tol.heat_residual {
        Some(format!("heat residual {worst_heat:.3e} exceeds {:.3e}", tol.heat_residual))
    } else {
        None
    };
    Ok(Outcome::new(table, report, breach))
}

pub fn evolve(model: &Model) -> Result<Outcome, CliError> {
    let run = &model.config.runs.evolve;
    let (geom, nu, cfg, p) = (&model.geometry, model.nu(), &model.kernel, &model.pressure);
    if !(run.t_end >= run.t_start) || !run.t_start.is_finite() || !run.t_end.is_finite() {
        return Err(validation(format!("runs.evolve needs t_start <= t_end, got {} and {}", run.t_start, run.t_end)));
    }
    if run.snapshots == 0 {
        return Err(validation("runs.evolve.snapshots must be at least 1"));
    }
    let h = geom.h();
    let burn_in = run.burn_in.unwrap_or((1e8f64).ln() * h * h / (nu * PI * PI));
    if !(burn_in >= 0.0) || !burn_in.is_finite() {
        return Err(validation(format!("runs.evolve.burn_in must be nonnegative, got {burn_in}")));
    }
    let grid = uniform_grid(geom, run.grid_points)?;
    let times: Vec<f64> = if run.t_end == run.t_start {
        vec![run.t_start]
    } else {
        let span = run.t_end - run.t_start;
        (0..=run.snapshots).map(|i| run.t_start + span * i as f64 / run.snapshots as f64).collect()
    };

    // the oracle starts from rest and is stepped exactly mode by mode
    let mut oracle = SineSpectrum::zeros(*geom, cfg.profile_k_max())?;
    let mut now = run.t_start - burn_in;
    let mut table = Table::new(&["x3", "t", "u1_duhamel", "u1_spectral", "abs_diff"]);
    let mut worst = 0.0f64;
    for &t in &times {
        oracle = spectral_evolve(geom, nu, p, &oracle, now, t, run.dt)?;
        now = t;
        let duhamel = duhamel_mean_velocity(geom, nu, p, t, &grid, cfg)?;
        let spectral = oracle.sample(&grid, t)?;
        for ((x, a), b) in grid.iter().zip(duhamel.values()).zip(spectral.values()) {
            let diff = (a - b).abs();
            worst = worst.max(diff);
            table.push(vec![(*x).into(), t.into(), (*a).into(), (*b).into(), diff.into()]);
        }
    }
    let limit = model.config.tolerance.evolve;
    let report = format!(
        "evolve: {} snapshots after burn-in {burn_in:.6}, max |duhamel - spectral| {worst:.3e} (limit {limit:.3e})\n",
        times.len()
    );
    let breach = (worst > limit).then(|| format!("max abs_diff {worst:.3e} exceeds {limit:.3e}"));
    Ok(Outcome::new(table, report, breach))
}

pub fn poiseuille(model: &Model) -> Result<Outcome, CliError> {
    let PressureSignal::Constant { p10 } = *model.pressure.signal() else {
        return Err(validation("poiseuille needs a constant pressure signal (pressure.signal.type = \"constant\")"));
    };
    let run = &model.config.runs.poiseuille;
    let (geom, nu, cfg) = (&model.geometry, model.nu(), &model.kernel);
    let grid = uniform_grid(geom, run.grid_points)?;
    let (mu, closed) = poiseuille_from_drop(geom, nu, p10, &grid)?;
    let duhamel = duhamel_mean_velocity(geom, nu, &model.pressure, run.t, &grid, cfg)?;
    let mut table = Table::new(&["x3", "u1_duhamel", "u1_closed", "abs_diff"]);
    let mut worst = 0.0f64;
    for ((x, a), b) in grid.iter().zip(duhamel.values()).zip(closed.values()) {
        let diff = (a - b).abs();
        worst = worst.max(diff);
        table.push(vec![(*x).into(), (*a).into(), (*b).into(), diff.into()]);
    }
    let limit = model.config.tolerance.evolve;
    let report = format!("poiseuille: mu = {mu:.17e}, max |duhamel - closed| {worst:.3e} (limit {limit:.3e})\n");
    let breach = (worst > limit).then(|| format!("max abs_diff {worst:.3e} exceeds {limit:.3e}"));
    Ok(Outcome::new(table, report, breach))
}

pub fn bound(model: &Model, style: Style) -> Result<Outcome, CliError> {
    let run = &model.config.runs.bound;
    let grid = uniform_grid(&model.geometry, run.grid_points)?;
    let r = reynolds_bound_check(&model.geometry, model.nu(), &model.pressure, run.window, &grid, &model.kernel)?;
    let mut table = Table::new(&["re", "l2_norm", "bound", "satisfied"]);
    table.push(vec![r.re.into(), r.l2_norm.into(), r.bound.into(), r.satisfied.into()]);
    let report = format!(
        "{:<12}{:<26}{:<26}{}\n{:<12}{:<26.17e}{:<26.17e}{}\n",
        "window",
        "Re",
        "bound",
        "satisfied",
        run.window,
        r.re,
        r.bound,
        style.verdict(r.satisfied, if r.satisfied { "true" } else { "false" })
    );
    let breach = (!r.satisfied).then(|| format!("Re = {:.6e} exceeds the bound {:.6e}", r.re, r.bound));
    Ok(Outcome::new(table, report, breach))
}

pub fn roughness(model: &Model, style: Style) -> Result<Outcome, CliError> {
    let run = &model.config.runs.roughness;
    let spec = &model.roughness;
    let ks: Vec<usize> = if run.k_values.is_empty() {
        (1..=run.k_max).step_by(2).collect()
    } else {
        run.k_values.clone()
    };
    if let Some(&k) = ks.iter().find(|&&k| k == 0 || k % 2 == 0) {
        return Err(validation(format!(
            "mode {k} requested; only odd k >= 1 can be matched, since even modes have a zero kernel coefficient"
        )));
    }
    let alpha = alpha_from_spec(spec);
    let h = model.geometry.h();
    let top = ks.iter().copied().max().unwrap_or(0);
    let update = if top > 0 { Some(apply_alpha_update(&SineSpectrum::new(model.geometry, vec![1.0; top])?, spec)?) } else { None };

    let mut table = Table::new(&[
        "k",
        "matching_set",
        "singleton",
        "multiplier",
        "literal_average_multiplier",
        "helmholtz_multiplier",
    ]);
    let mut report = format!("alpha = {alpha:.17e}\n{:<6}{:<12}{:<26}{}\n", "k", "singleton", "multiplier", "matching_set");
    let mut bad = Vec::new();
    for &k in &ks {
        let set = matching_check(spec, k, spec.n_max())?;
        let singleton = set == [k];
        if !singleton {
            bad.push(k);
        }
        let up = update.as_ref().expect("nonempty sweep");
        let (m, lit) = (up.multipliers[k - 1], up.literal_average_multipliers[k - 1]);
        let joined = set.iter().map(usize::to_string).collect::<Vec<_>>().join(";");
        report.push_str(&format!(
            "{:<6}{:<12}{:<26.17e}{{{}}}\n",
            k,
            style.verdict(singleton, if singleton { "yes" } else { "no" }),
            m,
            joined.replace(';', ",")
        ));
        table.push(vec![
            k.into(),
            Cell::Text(joined),
            singleton.into(),
            m.into(),
            lit.into(),
            helmholtz_multiplier(alpha, h, k).into(),
        ]);
    }
    let breach = (!bad.is_empty()).then(|| format!("matching set differs from {{k}} for k in {bad:?}"));
    Ok(Outcome::new(table, report, breach))
}

pub fn alpha(model: &Model) -> Result<Outcome, CliError> {
    let run = &model.config.runs.alpha;
    let (geom, nu, cfg) = (&model.geometry, model.nu(), &model.kernel);
    let grid = uniform_grid(geom, run.grid_points)?;
    let u = duhamel_spectrum(geom, nu, &model.pressure, run.t, cfg)?;
    let up = apply_alpha_update(&u, &model.roughness)?;
    let literal = u.map_modes(|k, c| c * up.literal_average_multipliers[k - 1]);
    let (a, b, c) = (u.sample(&grid, run.t)?, up.output.sample(&grid, run.t)?, literal.sample(&grid, run.t)?);
    let mut table = Table::new(&["x3", "u1", "u1_updated", "u1_literal_average"]);
    for (i, x) in grid.iter().enumerate() {
        table.push(vec![(*x).into(), a.values()[i].into(), b.values()[i].into(), c.values()[i].into()]);
    }
    let mut report = format!("alpha = {:.17e}\n", up.alpha);
    let breach = if up.unmatched_modes.is_empty() {
        None
    } else {
        let modes: Vec<usize> = up.unmatched_modes.iter().map(|(k, _)| *k).collect();
        report.push_str(&format!("modes without a singleton match: {modes:?}\n"));
        Some(format!("{} odd modes are not matched to their own generation", modes.len()))
    };
    Ok(Outcome::new(table, report, breach))
}

fn residual_line(name: &str, r: &StationaryResidual) -> String {
    format!(
        "{name}: nu v1'' = {:.17e}, deviation {:.3e}, max third difference {:.3e}\n",
        r.constant, r.deviation, r.max_third_difference
    )
}

pub fn profiles(model: &Model) -> Result<Outcome, CliError> {
    let run = &model.config.runs.profiles;
    if model.fluid.alpha() <= 0.0 {
        return Err(validation("profiles needs fluid.alpha > 0 for the NS-alpha profile"));
    }
    let grid = uniform_grid(&model.geometry, run.grid_points)?;
    let nse = poiseuille_profile(&model.geometry, run.b, &grid)?;
    let nsa = ns_alpha_profile(&model.geometry, &model.fluid, run.a1, run.a2, &grid)?;
    let mut table = Table::new(&["x3", "u_nse", "u_ns_alpha"]);
    for (i, x) in grid.iter().enumerate() {
        table.push(vec![(*x).into(), nse.values()[i].into(), nsa.values()[i].into()]);
    }
    let mut report = String::new();
    let mut breach = None;
    // third differences need at least 4 points; the residual itself needs 7
    if grid.len() >= 7 {
        let r_nse = stationary_residual(&nse, &model.fluid)?;
        let r_nsa = stationary_residual(&nsa, &model.fluid)?;
        report.push_str(&residual_line("nse", &r_nse));
        report.push_str(&residual_line("ns_alpha", &r_nsa));
        let worst = r_nse.max_third_difference.max(r_nsa.max_third_difference);
        if worst > THIRD_DIFFERENCE_LIMIT {
            breach = Some(format!("third difference {worst:.3e} exceeds {THIRD_DIFFERENCE_LIMIT:.0e}"));
        }
    } else {
        report.push_str("grid too coarse for the stationary residual (needs 7 points)\n");
    }
    Ok(Outcome::new(table, report, breach))
}
