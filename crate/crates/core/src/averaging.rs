//! Plane averages, the Duhamel representation of the mean streamwise velocity,
//! a mode-wise time stepper used as an independent oracle, the contraction
//! check and the incompressibility constraints on horizontally periodic fields.
//!
//! Mean profiles are carried as [`SineSpectrum`]s: mode `k` of the mean
//! velocity obeys
//!
//! ```text
//! dc_k/dt = -lambda_k c_k - p1(t)/Pi1 * g_k,   lambda_k = nu (pi k / h)^2,
//! g_k = sqrt(2/h) * 2h / (pi k)  (k odd),  0  (k even)
//! ```
//!
//! where `g_k` is the projection of the constant function 1 on the sine basis.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel_model::{poiseuille_profile, ChannelGeometry, MeanProfile, SineSpectrum};
use crate::error::{ensure, Error, Result};
use crate::kernel::{decay_rate, KernelConfig};
use crate::numerics::{cos_pi, exp_linear_integral, sin_pi, CompensatedSum};

/// Time dependence of the streamwise pressure drop `p1(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum PressureSignal {
    /// `p1(t) = p10` for all time.
    Constant { p10: f64 },
    /// Linear interpolation of `values[i]` at `t0 + i * dt`, held constant
    /// before the first and after the last sample.
    Sampled { t0: f64, dt: f64, values: Vec<f64> },
    /// `p1(t) = mean + amplitude * sin(omega t + phase)`.
    Sinusoid { mean: f64, amplitude: f64, omega: f64, phase: f64 },
}

/// A pressure-drop history together with its bound `p_bar`.
///
/// The streamwise drop must satisfy `0 < -p1(t) <= p_bar` everywhere. The
/// spanwise drop `p2` is identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureHistory {
    signal: PressureSignal,
    p_bar: f64,
    // running integral of the samples, for `Sampled`
    cumulative: Vec<f64>,
}

impl PressureHistory {
    pub fn new(signal: PressureSignal, p_bar: f64) -> Result<Self> {
        let history = Self::unchecked(signal, p_bar)?;
        let (lo, hi) = history.range();
        ensure!(
            hi < 0.0 && -lo <= history.p_bar,
            Validation,
            "pressure drop must satisfy 0 < -p1(t) <= p_bar = {}; signal spans [{lo}, {hi}]",
            history.p_bar
        );
        Ok(history)
    }

    /// Builds a history without enforcing `0 < -p1 <= p_bar`. Only the shape of
    /// the signal is validated. Intended for the zero-forcing limit in tests.
    pub fn unchecked(signal: PressureSignal, p_bar: f64) -> Result<Self> {
        ensure!(p_bar > 0.0 && p_bar.is_finite(), Validation, "p_bar must be positive, got {p_bar}");
        let mut cumulative = Vec::new();
        match &signal {
            PressureSignal::Constant { p10 } => {
                ensure!(p10.is_finite(), Validation, "p10 must be finite")
            }
            PressureSignal::Sampled { t0, dt, values } => {
                ensure!(t0.is_finite(), Validation, "t0 must be finite");
                ensure!(*dt > 0.0 && dt.is_finite(), Validation, "sample spacing must be positive");
                ensure!(values.len() >= 2, Validation, "a sampled signal needs at least 2 samples");
                ensure!(values.iter().all(|v| v.is_finite()), Validation, "non-finite pressure sample");
                cumulative.reserve(values.len());
                let mut acc = CompensatedSum::new();
                cumulative.push(0.0);
                for w in values.windows(2) {
                    acc += 0.5 * dt * (w[0] + w[1]);
                    cumulative.push(acc.value());
                }
            }
            PressureSignal::Sinusoid { mean, amplitude, omega, phase } => {
                ensure!(
                    [mean, amplitude, omega, phase].iter().all(|v| v.is_finite()),
                    Validation,
                    "sinusoid parameters must be finite"
                );
                ensure!(*omega >= 0.0, Validation, "sinusoid frequency must be nonnegative");
            }
        }
        Ok(Self { signal, p_bar, cumulative })
    }

    pub fn constant(p10: f64, p_bar: f64) -> Result<Self> {
        Self::new(PressureSignal::Constant { p10 }, p_bar)
    }

    pub fn sampled(t0: f64, dt: f64, values: Vec<f64>, p_bar: f64) -> Result<Self> {
        Self::new(PressureSignal::Sampled { t0, dt, values }, p_bar)
    }

    pub fn sinusoid(mean: f64, amplitude: f64, omega: f64, phase: f64, p_bar: f64) -> Result<Self> {
        Self::new(PressureSignal::Sinusoid { mean, amplitude, omega, phase }, p_bar)
    }

    /// `p1 = 0` with bound `p_bar = 1`, which is outside the admissible class.
    pub fn zero_unchecked() -> Self {
        Self::unchecked(PressureSignal::Constant { p10: 0.0 }, 1.0).expect("zero signal is well formed")
    }

    pub fn signal(&self) -> &PressureSignal {
        &self.signal
    }

    pub fn p_bar(&self) -> f64 {
        self.p_bar
    }

    /// Smallest and largest value the signal takes.
    pub fn range(&self) -> (f64, f64) {
        match &self.signal {
            PressureSignal::Constant { p10 } => (*p10, *p10),
            PressureSignal::Sampled { values, .. } => values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v))),
            PressureSignal::Sinusoid { mean, amplitude, omega, phase } => {
                if *omega == 0.0 {
                    let v = mean + amplitude * phase.sin();
                    (v, v)
                } else {
                    (mean - amplitude.abs(), mean + amplitude.abs())
                }
            }
        }
    }

    /// `p1(t)`.
    pub fn p1(&self, t: f64) -> f64 {
        match &self.signal {
            PressureSignal::Constant { p10 } => *p10,
            PressureSignal::Sampled { t0, dt, values } => {
                let u = (t - t0) / dt;
                if u <= 0.0 {
                    return values[0];
                }
                let last = values.len() - 1;
                if u >= last as f64 {
                    return values[last];
                }
                let i = (u.floor() as usize).min(last - 1);
                let w = u - i as f64;
                values[i] + w * (values[i + 1] - values[i])
            }
            PressureSignal::Sinusoid { mean, amplitude, omega, phase } => {
                mean + amplitude * (omega * t + phase).sin()
            }
        }
    }

    /// The spanwise drop, identically zero.
    pub fn p2(&self, _t: f64) -> f64 {
        0.0
    }

    /// `int_a^b p1(t) dt`, exact for every signal type.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.antiderivative(b) - self.antiderivative(a)
    }

    fn antiderivative(&self, t: f64) -> f64 {
        match &self.signal {
            PressureSignal::Constant { p10 } => p10 * t,
            PressureSignal::Sinusoid { mean, amplitude, omega, phase } => {
                if *omega == 0.0 {
                    (mean + amplitude * phase.sin()) * t
                } else {
                    mean * t - amplitude * (omega * t + phase).cos() / omega
                }
            }
            PressureSignal::Sampled { t0, dt, values } => {
                let last = values.len() - 1;
                let t_last = t0 + last as f64 * dt;
                if t <= *t0 {
                    return values[0] * (t - t0);
                }
                if t >= t_last {
                    return self.cumulative[last] + values[last] * (t - t_last);
                }
                let u = (t - t0) / dt;
                let i = (u.floor() as usize).min(last - 1);
                let s = t - (t0 + i as f64 * dt);
                self.cumulative[i] + s * 0.5 * (values[i] + self.p1(t))
            }
        }
    }

    /// `int_{-inf}^t exp(-rate (t - tau)) p1(tau) dtau`.
    ///
    /// Closed form for constant and sinusoidal signals. Sampled signals are
    /// integrated exactly segment by segment back to the lag
    /// `ln(1/tail_tol) / rate`; the history before that is replaced by its value
    /// at the cut, which is exact when the cut reaches the first sample.
    pub fn history_integral(&self, rate: f64, t: f64, tail_tol: f64) -> f64 {
        match &self.signal {
            PressureSignal::Constant { p10 } => p10 / rate,
            PressureSignal::Sinusoid { mean, amplitude, omega, phase } => {
                let arg = omega * t + phase;
                mean / rate
                    + amplitude * (rate * arg.sin() - omega * arg.cos()) / (rate * rate + omega * omega)
            }
            PressureSignal::Sampled { t0, dt, .. } => {
                let lag = (1.0 / tail_tol).ln() / rate;
                let start = (t - lag).max(*t0);
                if t <= start {
                    return self.p1(t) / rate;
                }
                let mut acc = CompensatedSum::new();
                acc += (-rate * (t - start)).exp() * self.p1(start) / rate;
                let first = ((start - t0) / dt).floor() as i64 + 1;
                let mut a = start;
                let mut i = first.max(0);
                loop {
                    let knot = t0 + i as f64 * dt;
                    let b = if knot < t { knot } else { t };
                    if b > a {
                        acc += (-rate * (t - b)).exp() * exp_linear_integral(rate, b - a, self.p1(a), self.p1(b));
                    }
                    if b >= t {
                        break;
                    }
                    a = b;
                    i += 1;
                }
                acc.value()
            }
        }
    }
}

/// Projection of the constant function 1 on sine mode `k`.
pub fn unit_projection(h: f64, k: usize) -> f64 {
    if k % 2 == 0 {
        0.0
    } else {
        (2.0 / h).sqrt() * 2.0 * h / (PI * k as f64)
    }
}

fn check_nu(nu: f64) -> Result<()> {
    ensure!(nu > 0.0 && nu.is_finite(), Validation, "viscosity must be positive, got {nu}");
    Ok(())
}

/// L2 bound on the odd modes beyond `k_last` of a spectrum whose mode-`k`
/// coefficient is at most `c / k^3`.
fn cubic_decay_tail(c: f64, k_last: usize) -> f64 {
    // sum over odd j > k_last of j^-6 is at most 1 / (10 k_last^5)
    c * (1.0 / (10.0 * (k_last as f64).powi(5))).sqrt()
}

/// Sine spectrum of the mean streamwise velocity at time `t`: the Duhamel
/// convolution of the pressure history against the kernel, mode by mode.
pub fn duhamel_spectrum(
    geom: &ChannelGeometry,
    nu: f64,
    pressure: &PressureHistory,
    t: f64,
    cfg: &KernelConfig,
) -> Result<SineSpectrum> {
    check_nu(nu)?;
    ensure!(t.is_finite(), Validation, "time must be finite");
    let (h, pi1) = (geom.h(), geom.pi1());
    let k_last = cfg.profile_k_max();
    let coeffs = (1..=k_last)
        .map(|k| {
            if k % 2 == 0 {
                return 0.0;
            }
            let rate = decay_rate(nu, h, k);
            -unit_projection(h, k) / pi1 * pressure.history_integral(rate, t, cfg.tail_tol())
        })
        .collect();
    // |I_k| <= p_bar / lambda_k
    let c = unit_projection(h, 1) / pi1 * pressure.p_bar() / decay_rate(nu, h, 1);
    Ok(SineSpectrum::new(*geom, coeffs)?.with_tail_bound(cubic_decay_tail(c, k_last)))
}

/// Mean streamwise velocity `<u1(t)>` sampled on `grid`.
pub fn duhamel_mean_velocity(
    geom: &ChannelGeometry,
    nu: f64,
    pressure: &PressureHistory,
    t: f64,
    grid: &[f64],
    cfg: &KernelConfig,
) -> Result<MeanProfile> {
    duhamel_spectrum(geom, nu, pressure, t, cfg)?.sample(grid, t)
}

/// `mu = -p10 / (2 Pi1 nu)` and the steady profile `mu d (h - d)`, `d` the
/// distance from the lower wall.
pub fn poiseuille_from_drop(
    geom: &ChannelGeometry,
    nu: f64,
    p10: f64,
    grid: &[f64],
) -> Result<(f64, MeanProfile)> {
    check_nu(nu)?;
    ensure!(
        p10 < 0.0,
        Validation,
        "a constant pressure drop must be negative (0 < -p1), got {p10}"
    );
    let mu = -p10 / (2.0 * geom.pi1() * nu);
    let profile = poiseuille_profile(geom, mu * geom.h() * geom.h() / 4.0, grid)?;
    Ok((mu, profile))
}

/// Exact sine coefficients of `mu d (h - d)` up to mode `k_last`.
pub fn poiseuille_spectrum(geom: &ChannelGeometry, mu: f64, k_last: usize) -> Result<SineSpectrum> {
    let h = geom.h();
    let coeffs = (1..=k_last)
        .map(|k| mu * unit_projection(h, k) * 2.0 * h * h / (PI * k as f64).powi(2))
        .collect();
    SineSpectrum::new(*geom, coeffs)
}

/// Advances `initial` from `t0` to `t1` with steps of `dt` (the last step is
/// shortened to land on `t1`). Each mode is propagated exactly, with `p1`
/// interpolated linearly between the ends of every step.
pub fn spectral_evolve(
    geom: &ChannelGeometry,
    nu: f64,
    pressure: &PressureHistory,
    initial: &SineSpectrum,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<SineSpectrum> {
    check_nu(nu)?;
    ensure!(dt > 0.0 && dt.is_finite(), Validation, "time step must be positive, got {dt}");
    ensure!(t1 >= t0, Validation, "cannot evolve backwards from {t0} to {t1}");
    ensure!(initial.geometry() == geom, Validation, "initial spectrum lives on a different channel");
    let (h, pi1) = (geom.h(), geom.pi1());
    let k_last = initial.k_max();
    let rates: Vec<f64> = (1..=k_last).map(|k| decay_rate(nu, h, k)).collect();
    let gains: Vec<f64> = (1..=k_last).map(|k| -unit_projection(h, k) / pi1).collect();
    let mut c = initial.coeffs().to_vec();
    let steps = ((t1 - t0) / dt * (1.0 - 1e-12)).ceil() as usize;
    let mut a = t0;
    for n in 1..=steps {
        let b = if n == steps { t1 } else { t0 + n as f64 * dt };
        let span = b - a;
        let (pa, pb) = (pressure.p1(a), pressure.p1(b));
        for (i, ci) in c.iter_mut().enumerate() {
            *ci = (-rates[i] * span).exp() * *ci
                + gains[i] * exp_linear_integral(rates[i], span, pa, pb);
        }
        a = b;
    }
    SineSpectrum::new(*geom, c)
}

/// Outcome of [`contraction_decay_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    /// Least-squares decay rate of `||A - B||^2` over the second half of the horizon.
    pub fitted_rate: f64,
    /// `2 nu / h^2`, the rate guaranteed by the Poincare inequality.
    pub poincare_rate: f64,
    /// `2 nu (pi / h)^2`, the decay rate of the slowest sine mode.
    pub slowest_mode_rate: f64,
    /// `(t, ||A - B||^2)` at the fitted sample times.
    pub samples: Vec<(f64, f64)>,
}

/// Evolves two initial spectra under the same forcing for `horizon` and fits
/// the decay rate of the squared L2 distance between them.
pub fn contraction_decay_check(
    geom: &ChannelGeometry,
    nu: f64,
    pressure: &PressureHistory,
    init_a: &SineSpectrum,
    init_b: &SineSpectrum,
    horizon: f64,
) -> Result<ContractionReport> {
    check_nu(nu)?;
    ensure!(horizon > 0.0 && horizon.is_finite(), Validation, "horizon must be positive");
    ensure!(
        init_a != init_b,
        DegenerateFit,
        "initial spectra are identical; their distance has no decay rate"
    );
    let h = geom.h();
    let n_samples = 32;
    let dt = horizon / 512.0;
    let mut a = init_a.clone();
    let mut b = init_b.clone();
    let mut t = 0.0;
    let mut samples = Vec::with_capacity(n_samples + 1);
    for i in 0..=n_samples {
        let target = horizon * (0.5 + 0.5 * i as f64 / n_samples as f64);
        a = spectral_evolve(geom, nu, pressure, &a, t, target, dt)?;
        b = spectral_evolve(geom, nu, pressure, &b, t, target, dt)?;
        t = target;
        let dist = a.added(&b.scaled(-1.0))?.l2_norm();
        ensure!(
            dist > 0.0 && dist.is_finite(),
            DegenerateFit,
            "distance between the evolutions vanished at t = {t}"
        );
        samples.push((t, dist * dist));
    }
    let fitted_rate = -fit_slope(samples.iter().map(|&(t, d)| (t, d.ln())))?;
    Ok(ContractionReport {
        fitted_rate,
        poincare_rate: 2.0 * nu / (h * h),
        slowest_mode_rate: 2.0 * decay_rate(nu, h, 1),
        samples,
    })
}

fn fit_slope(points: impl Iterator<Item = (f64, f64)>) -> Result<f64> {
    let pts: Vec<(f64, f64)> = points.collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 || !sxy.is_finite() {
        return Err(Error::DegenerateFit("sample times do not span an interval".into()));
    }
    Ok(sxy / sxx)
}

/// Velocity component selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    U1,
    U2,
    U3,
}

impl Component {
    fn index(self) -> usize {
        match self {
            Component::U1 => 0,
            Component::U2 => 1,
            Component::U3 => 2,
        }
    }
}

/// Wavevector `(k1, k2, k3)` with `k3 >= 1`.
pub type Wavevector = (i64, i64, u32);

/// A velocity field with finitely many modes on the basis
/// `exp(2 pi i (k1 x1 / Pi1 + k2 x2 / Pi2)) sin(pi k3 x3' / h)`, where `x3'` is
/// the distance from the lower wall.
///
/// Coefficients satisfy `u(-k1, -k2, k3) = conj(u(k1, k2, k3))`, so the field is real.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    geometry: ChannelGeometry,
    modes: BTreeMap<Wavevector, [Complex64; 3]>,
}

impl PeriodicField {
    pub fn new(geometry: ChannelGeometry, modes: BTreeMap<Wavevector, [Complex64; 3]>) -> Result<Self> {
        let scale = modes
            .values()
            .flat_map(|u| u.iter())
            .fold(0.0f64, |m, c| m.max(c.norm()));
        let tol = 1e-13 * scale.max(f64::MIN_POSITIVE);
        for (&(k1, k2, k3), u) in &modes {
            ensure!(k3 >= 1, Validation, "wall-normal index k3 must be at least 1");
            ensure!(
                u.iter().all(|c| c.re.is_finite() && c.im.is_finite()),
                Validation,
                "non-finite coefficient at {:?}",
                (k1, k2, k3)
            );
            let zero = [Complex64::new(0.0, 0.0); 3];
            let mirror = modes.get(&(-k1, -k2, k3)).unwrap_or(&zero);
            for j in 0..3 {
                ensure!(
                    (u[j] - mirror[j].conj()).norm() <= tol,
                    Validation,
                    "coefficients at {:?} and {:?} are not conjugate; the field would be complex",
                    (k1, k2, k3),
                    (-k1, -k2, k3)
                );
            }
        }
        Ok(Self { geometry, modes })
    }

    pub fn geometry(&self) -> &ChannelGeometry {
        &self.geometry
    }

    pub fn modes(&self) -> &BTreeMap<Wavevector, [Complex64; 3]> {
        &self.modes
    }

    fn phase(&self, k1: i64, k2: i64, x1: f64, x2: f64) -> Complex64 {
        let theta = 2.0 * (k1 as f64 * x1 / self.geometry.pi1() + k2 as f64 * x2 / self.geometry.pi2());
        Complex64::new(cos_pi(theta), sin_pi(theta))
    }

    /// Value of one component at a point.
    pub fn sample(&self, component: Component, x1: f64, x2: f64, x3: f64) -> Result<f64> {
        let s = self.geometry.local(x3)? / self.geometry.h();
        let j = component.index();
        let mut acc = CompensatedSum::new();
        for (&(k1, k2, k3), u) in &self.modes {
            acc += (u[j] * self.phase(k1, k2, x1, x2)).re * sin_pi(k3 as f64 * s);
        }
        Ok(acc.value())
    }

    /// `div u` at a point, from termwise derivatives.
    pub fn divergence(&self, x1: f64, x2: f64, x3: f64) -> Result<f64> {
        let h = self.geometry.h();
        let s = self.geometry.local(x3)? / h;
        let (pi1, pi2) = (self.geometry.pi1(), self.geometry.pi2());
        let mut acc = CompensatedSum::new();
        for (&(k1, k2, k3), u) in &self.modes {
            let e = self.phase(k1, k2, x1, x2);
            let tangential = Complex64::new(0.0, 2.0 * PI)
                * (u[0] * (k1 as f64 / pi1) + u[1] * (k2 as f64 / pi2));
            let k3f = k3 as f64;
            acc += (tangential * e).re * sin_pi(k3f * s);
            acc += (u[2] * e).re * (PI * k3f / h) * cos_pi(k3f * s);
        }
        Ok(acc.value())
    }

    /// Plane average of one component: exactly the `(k1, k2) = (0, 0)` modes.
    pub fn reynolds_average(&self, component: Component, grid: &[f64]) -> Result<MeanProfile> {
        let h = self.geometry.h();
        let j = component.index();
        let values = grid
            .iter()
            .map(|&x3| {
                let s = self.geometry.local(x3)? / h;
                Ok(self
                    .modes
                    .iter()
                    .filter(|(&(k1, k2, _), _)| k1 == 0 && k2 == 0)
                    .map(|(&(_, _, k3), u)| u[j].re * sin_pi(k3 as f64 * s))
                    .collect::<CompensatedSum>()
                    .value())
            })
            .collect::<Result<Vec<_>>>()?;
        MeanProfile::new(grid.to_vec(), values, 0.0)
    }
}

/// Violations of the two constraints that incompressibility and the wall
/// conditions impose on each Fourier mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceReport {
    /// `max |u3(k)| pi k3 / h`: the wall-normal part, which must vanish.
    pub normal: f64,
    /// `max 2 pi |k1 u1(k) / Pi1 + k2 u2(k) / Pi2|`: the tangential part.
    pub tangential: f64,
}

impl DivergenceReport {
    pub fn max_violation(&self) -> f64 {
        self.normal.max(self.tangential)
    }

    pub fn admissible(&self, tol: f64) -> bool {
        self.max_violation() <= tol
    }
}

pub fn divergence_constraint_check(field: &PeriodicField) -> DivergenceReport {
    let geom = field.geometry();
    let (h, pi1, pi2) = (geom.h(), geom.pi1(), geom.pi2());
    let mut report = DivergenceReport { normal: 0.0, tangential: 0.0 };
    for (&(k1, k2, k3), u) in field.modes() {
        report.normal = report.normal.max(u[2].norm() * k3 as f64 * PI / h);
        let t = (u[0] * (k1 as f64 / pi1) + u[1] * (k2 as f64 / pi2)).norm() * 2.0 * PI;
        report.tangential = report.tangential.max(t);
    }
    report
}

/// Samples of a scalar field on a full periodic cell: `n1 x n2` points in
/// `[0, Pi1] x [0, Pi2]` including both endpoints, times a wall-normal grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedField {
    geometry: ChannelGeometry,
    n1: usize,
    n2: usize,
    x3: Vec<f64>,
    // index (i1 * n2 + i2) * x3.len() + i3
    values: Vec<f64>,
}

impl GriddedField {
    pub fn new(
        geometry: ChannelGeometry,
        n1: usize,
        n2: usize,
        x3: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        ensure!(n1 >= 2 && n2 >= 2, Resolution, "each periodic direction needs at least 2 samples");
        ensure!(!x3.is_empty(), Resolution, "wall-normal grid is empty");
        ensure!(
            values.len() == n1 * n2 * x3.len(),
            Validation,
            "expected {} samples, got {}",
            n1 * n2 * x3.len(),
            values.len()
        );
        Ok(Self { geometry, n1, n2, x3, values })
    }

    /// Samples `f(x1, x2, x3)` on the cell.
    pub fn from_fn(
        geometry: ChannelGeometry,
        n1: usize,
        n2: usize,
        x3: Vec<f64>,
        f: impl Fn(f64, f64, f64) -> Result<f64>,
    ) -> Result<Self> {
        ensure!(n1 >= 2 && n2 >= 2, Resolution, "each periodic direction needs at least 2 samples");
        let mut values = Vec::with_capacity(n1 * n2 * x3.len());
        for i1 in 0..n1 {
            let x1 = geometry.pi1() * i1 as f64 / (n1 - 1) as f64;
            for i2 in 0..n2 {
                let x2 = geometry.pi2() * i2 as f64 / (n2 - 1) as f64;
                for &z in &x3 {
                    values.push(f(x1, x2, z)?);
                }
            }
        }
        Self::new(geometry, n1, n2, x3, values)
    }

    fn at(&self, i1: usize, i2: usize, i3: usize) -> f64 {
        self.values[(i1 * self.n2 + i2) * self.x3.len() + i3]
    }

    /// Plane average by the trapezoid rule over the cell. Fails if the samples
    /// on opposite faces of the cell disagree.
    pub fn reynolds_average(&self) -> Result<MeanProfile> {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
        let m = self.x3.len();
        let (l1, l2) = (self.n1 - 1, self.n2 - 1);
        for i3 in 0..m {
            for i2 in 0..self.n2 {
                ensure!(
                    (self.at(0, i2, i3) - self.at(l1, i2, i3)).abs() <= tol,
                    Validation,
                    "samples are not periodic in x1 at x3 = {}",
                    self.x3[i3]
                );
            }
            for i1 in 0..self.n1 {
                ensure!(
                    (self.at(i1, 0, i3) - self.at(i1, l2, i3)).abs() <= tol,
                    Validation,
                    "samples are not periodic in x2 at x3 = {}",
                    self.x3[i3]
                );
            }
        }
        // for periodic data the trapezoid rule is the mean over the distinct points
        let values = (0..m)
            .map(|i3| {
                let sum: CompensatedSum =
                    (0..l1).flat_map(|i1| (0..l2).map(move |i2| (i1, i2))).map(|(i1, i2)| self.at(i1, i2, i3)).collect();
                sum.value() / (l1 * l2) as f64
            })
            .collect();
        MeanProfile::new(self.x3.clone(), values, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel_model::uniform_grid;

    fn unit() -> (ChannelGeometry, KernelConfig) {
        let g = ChannelGeometry::new(1.0, 1.0, 1.0).unwrap();
        (g, KernelConfig::for_channel(&g, 1.0))
    }

    #[test]
    fn pressure_bound_is_enforced() {
        assert!(PressureHistory::constant(-1.0, 1.0).is_ok());
        assert!(PressureHistory::constant(0.0, 1.0).is_err());
        assert!(PressureHistory::constant(-1.5, 1.0).is_err());
        assert!(PressureHistory::sampled(0.0, 0.1, vec![-1.0, 0.1], 2.0).is_err());
        assert!(PressureHistory::sinusoid(-1.0, 0.5, 1.0, 0.0, 1.5).is_ok());
        assert!(PressureHistory::sinusoid(-1.0, 1.0, 1.0, 0.0, 3.0).is_err());
        assert!(PressureHistory::sinusoid(-1.0, 0.5, 1.0, 0.0, 1.4).is_err());
        assert_eq!(PressureHistory::zero_unchecked().p2(3.0), 0.0);
    }

    #[test]
    fn sampled_signal_interpolates_and_integrates() {
        let p = PressureHistory::sampled(1.0, 0.5, vec![-1.0, -2.0, -1.5], 2.0).unwrap();
        assert_eq!(p.p1(0.0), -1.0);
        assert_eq!(p.p1(1.25), -1.5);
        assert_eq!(p.p1(5.0), -1.5);
        // -1 * 1 + trapezoids (-0.75, -0.875) + -1.5 * 1
        assert!((p.integral(0.0, 3.0) - (-1.0 - 0.75 - 0.875 - 1.5)).abs() < 1e-15);
        assert!((p.integral(1.25, 1.5) - (-0.25 * 1.75)).abs() < 1e-15);
    }

    #[test]
    fn history_integral_of_constant_samples_is_exact() {
        let p = PressureHistory::sampled(0.0, 0.01, vec![-2.0; 500], 2.0).unwrap();
        for &rate in &[0.5, PI * PI, 900.0] {
            let v = p.history_integral(rate, 3.7, 1e-10);
            assert!((v + 2.0 / rate).abs() < 1e-14 / rate, "rate {rate}");
        }
    }

    #[test]
    fn history_integral_of_a_ramp() {
        // p(t) = -1 - t on [0, 1]: closed form of int_0^1 e^{-r(1-s)} (-1 - s) ds plus
        // the constant pre-history e^{-r} (-1) / r
        let values: Vec<f64> = (0..=100).map(|i| -1.0 - i as f64 / 100.0).collect();
        let p = PressureHistory::sampled(0.0, 0.01, values, 3.0).unwrap();
        let r: f64 = 2.0;
        let em = (-r).exp();
        let ramp = -(1.0 - em) / r - (1.0 / r - (1.0 - em) / (r * r));
        let expected = ramp - em / r;
        assert!((p.history_integral(r, 1.0, 1e-14) - expected).abs() < 1e-14);
    }

    #[test]
    fn constant_drop_gives_the_parabola() {
        let (g, cfg) = unit();
        let p = PressureHistory::constant(-2.0, 2.0).unwrap();
        let grid = uniform_grid(&g, 65).unwrap();
        let prof = duhamel_mean_velocity(&g, 1.0, &p, 0.0, &grid, &cfg).unwrap();
        for (x, v) in grid.iter().zip(prof.values()) {
            assert!((v - x * (1.0 - x)).abs() < 1e-6, "x = {x}");
        }
        let (mu, parabola) = poiseuille_from_drop(&g, 1.0, -2.0, &grid).unwrap();
        assert_eq!(mu, 1.0);
        assert_eq!(parabola.values()[32], 0.25);
        assert!(poiseuille_from_drop(&g, 1.0, 0.0, &grid).is_err());
    }

    #[test]
    fn duhamel_coefficients_match_the_poiseuille_spectrum() {
        let (g, cfg) = unit();
        let p = PressureHistory::constant(-2.0, 2.0).unwrap();
        let d = duhamel_spectrum(&g, 1.0, &p, 0.0, &cfg).unwrap();
        let exact = poiseuille_spectrum(&g, 1.0, d.k_max()).unwrap();
        for k in 1..=d.k_max() {
            assert!((d.coefficient(k) - exact.coefficient(k)).abs() < 1e-15, "mode {k}");
        }
        assert!(d.tail_bound() > 0.0 && d.tail_bound() < 1e-7);
    }

    #[test]
    fn zero_forcing_decays_a_single_mode_exactly() {
        let (g, _) = unit();
        let zero = PressureHistory::zero_unchecked();
        let init = SineSpectrum::single_mode(g, 3, 1, 1.0).unwrap();
        let out = spectral_evolve(&g, 1.0, &zero, &init, 0.0, 0.3, 0.1).unwrap();
        let expected = (-PI * PI * 0.3f64).exp();
        assert!((out.coefficient(1) - expected).abs() < 1e-15);
        assert_eq!(out.coefficient(2), 0.0);
    }

    #[test]
    fn evolution_is_exact_for_aligned_piecewise_linear_forcing() {
        let (g, _) = unit();
        let values: Vec<f64> = (0..=10).map(|i| -1.0 - 0.5 * ((i * 7) % 5) as f64 / 5.0).collect();
        let p = PressureHistory::sampled(0.0, 0.1, values, 2.0).unwrap();
        let init = SineSpectrum::zeros(g, 9).unwrap();
        let coarse = spectral_evolve(&g, 1.0, &p, &init, 0.0, 1.0, 0.1).unwrap();
        let fine = spectral_evolve(&g, 1.0, &p, &init, 0.0, 1.0, 0.05).unwrap();
        for k in 1..=9 {
            assert!((coarse.coefficient(k) - fine.coefficient(k)).abs() < 1e-14);
        }
    }

    #[test]
    fn single_mode_difference_decays_at_its_own_rate() {
        let (g, _) = unit();
        let p = PressureHistory::constant(-1.0, 1.0).unwrap();
        let a = SineSpectrum::single_mode(g, 5, 3, 1.0).unwrap();
        let b = SineSpectrum::zeros(g, 5).unwrap();
        let r = contraction_decay_check(&g, 1.0, &p, &a, &b, 0.1).unwrap();
        let expected = 2.0 * 9.0 * PI * PI;
        assert!((r.fitted_rate - expected).abs() < 1e-6 * expected, "{}", r.fitted_rate);
        assert!(matches!(
            contraction_decay_check(&g, 1.0, &p, &a, &a, 1.0),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn divergence_report_flags_the_normal_component() {
        let g = ChannelGeometry::new(2.0, 1.0, 1.0).unwrap();
        let mut modes = BTreeMap::new();
        let z = Complex64::new(0.0, 0.0);
        modes.insert((0, 0, 3), [z, z, Complex64::new(0.5, 0.0)]);
        let f = PeriodicField::new(g, modes).unwrap();
        let r = divergence_constraint_check(&f);
        assert!((r.normal - 0.5 * 3.0 * PI / 2.0).abs() < 1e-15);
        assert_eq!(r.tangential, 0.0);
    }

    #[test]
    fn non_conjugate_fields_are_rejected() {
        let g = ChannelGeometry::new(1.0, 1.0, 1.0).unwrap();
        let z = Complex64::new(0.0, 0.0);
        let mut modes = BTreeMap::new();
        modes.insert((1, 0, 1), [Complex64::new(1.0, 1.0), z, z]);
        assert!(PeriodicField::new(g, modes.clone()).is_err());
        modes.insert((-1, 0, 1), [Complex64::new(1.0, -1.0), z, z]);
        assert!(PeriodicField::new(g, modes).is_ok());
    }

    #[test]
    fn plane_average_of_an_oscillation_vanishes() {
        let g = ChannelGeometry::new(1.0, 2.0, 1.0).unwrap();
        let x3 = uniform_grid(&g, 9).unwrap();
        let field = GriddedField::from_fn(g, 17, 5, x3.clone(), |x1, _, z| {
            Ok((2.0 * PI * x1 / 2.0).sin() * z * (1.0 - z))
        })
        .unwrap();
        let avg = field.reynolds_average().unwrap();
        assert!(avg.max_abs() < 1e-15);
        let flat = GriddedField::from_fn(g, 5, 5, x3.clone(), |_, _, z| Ok(z * z)).unwrap();
        let avg = flat.reynolds_average().unwrap();
        for (z, v) in x3.iter().zip(avg.values()) {
            assert!((v - z * z).abs() < 1e-15);
        }
        let ramp = GriddedField::from_fn(g, 5, 5, x3, |x1, _, _| Ok(x1)).unwrap();
        assert!(matches!(ramp.reynolds_average(), Err(Error::Validation(_))));
    }
}
