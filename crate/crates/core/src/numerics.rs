//! Small numerical building blocks: compensated summation, exact-argument
//! trigonometry, uniform-grid quadrature and finite-difference stencils,
//! and the `phi` functions of exponential integrators.

use std::ops::{Add, AddAssign};

use crate::error::{ensure, Result};

/// Kahan-Babuska-Neumaier accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl AddAssign<f64> for CompensatedSum {
    #[inline]
    fn add_assign(&mut self, rhs: f64) {
        let t = self.sum + rhs;
        if self.sum.abs() >= rhs.abs() {
            self.compensation += (self.sum - t) + rhs;
        } else {
            self.compensation += (rhs - t) + self.sum;
        }
        self.sum = t;
    }
}

impl Add<f64> for CompensatedSum {
    type Output = Self;

    fn add(mut self, rhs: f64) -> Self {
        self += rhs;
        self
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc += v;
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// `sin(pi * y)` with exact argument reduction, so integer `y` gives exactly 0.
pub fn sin_pi(y: f64) -> f64 {
    let mut r = y % 2.0;
    if r > 1.0 {
        r -= 2.0;
    } else if r < -1.0 {
        r += 2.0;
    }
    // r in [-1, 1]; fold onto [-1/2, 1/2]
    if r > 0.5 {
        r = 1.0 - r;
    } else if r < -0.5 {
        r = -1.0 - r;
    }
    (std::f64::consts::PI * r).sin()
}

/// `cos(pi * y)` with exact argument reduction.
pub fn cos_pi(y: f64) -> f64 {
    let mut r = y.abs() % 2.0;
    if r > 1.0 {
        r = 2.0 - r;
    }
    if r < 0.25 {
        (std::f64::consts::PI * r).cos()
    } else {
        (std::f64::consts::PI * (0.5 - r)).sin()
    }
}

/// Spacing of a uniform grid, or `None` if the samples are not equally spaced
/// to a relative tolerance of `1e-9`.
pub fn uniform_spacing(grid: &[f64]) -> Option<f64> {
    if grid.len() < 2 {
        return None;
    }
    let n = grid.len() - 1;
    let dx = (grid[n] - grid[0]) / n as f64;
    if dx <= 0.0 {
        return None;
    }
    grid.windows(2)
        .all(|w| ((w[1] - w[0]) - dx).abs() <= 1e-9 * dx)
        .then_some(dx)
}

/// Composite Simpson rule on an odd number of equally spaced samples.
pub fn simpson(values: &[f64], dx: f64) -> Result<f64> {
    let n = values.len();
    ensure!(n >= 3, Resolution, "Simpson quadrature needs at least 3 samples, got {n}");
    ensure!(n % 2 == 1, Resolution, "Simpson quadrature needs an odd number of samples, got {n}");
    let mut acc = CompensatedSum::new();
    acc += values[0];
    acc += values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    Ok(acc.value() * dx / 3.0)
}

/// Fourth-order first derivative on a uniform grid (one-sided at the ends).
pub fn fd4_first(values: &[f64], dx: f64) -> Result<Vec<f64>> {
    let n = values.len();
    ensure!(n >= 5, Resolution, "fourth-order first derivative needs at least 5 samples, got {n}");
    let f = values;
    let c = 12.0 * dx;
    let mut out = vec![0.0; n];
    out[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / c;
    out[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / c;
    for i in 2..n - 2 {
        out[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / c;
    }
    let m = n - 1;
    out[m] = (25.0 * f[m] - 48.0 * f[m - 1] + 36.0 * f[m - 2] - 16.0 * f[m - 3] + 3.0 * f[m - 4]) / c;
    out[m - 1] =
        (3.0 * f[m] + 10.0 * f[m - 1] - 18.0 * f[m - 2] + 6.0 * f[m - 3] - f[m - 4]) / c;
    Ok(out)
}

/// Fourth-order second derivative on a uniform grid (one-sided at the ends).
pub fn fd4_second(values: &[f64], dx: f64) -> Result<Vec<f64>> {
    let n = values.len();
    ensure!(n >= 6, Resolution, "fourth-order second derivative needs at least 6 samples, got {n}");
    let f = values;
    let c = 12.0 * dx * dx;
    let mut out = vec![0.0; n];
    out[0] = (45.0 * f[0] - 154.0 * f[1] + 214.0 * f[2] - 156.0 * f[3] + 61.0 * f[4]
        - 10.0 * f[5])
        / c;
    out[1] = (10.0 * f[0] - 15.0 * f[1] - 4.0 * f[2] + 14.0 * f[3] - 6.0 * f[4] + f[5]) / c;
    for i in 2..n - 2 {
        out[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) / c;
    }
    let m = n - 1;
    out[m] = (45.0 * f[m] - 154.0 * f[m - 1] + 214.0 * f[m - 2] - 156.0 * f[m - 3]
        + 61.0 * f[m - 4]
        - 10.0 * f[m - 5])
        / c;
    out[m - 1] = (10.0 * f[m] - 15.0 * f[m - 1] - 4.0 * f[m - 2] + 14.0 * f[m - 3]
        - 6.0 * f[m - 4]
        + f[m - 5])
        / c;
    Ok(out)
}

/// `(1 - e^{-x}) / x`, stable near zero.
pub fn phi1(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 - x / 2.0 + x * x / 6.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// `(x - 1 + e^{-x}) / x^2`, stable near zero.
pub fn phi2(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0
    } else {
        (x + (-x).exp_m1()) / (x * x)
    }
}

/// `exp(-rate * (t - tau))` integrated against the linear function running from
/// `p_start` at `tau = t - span` to `p_end` at `tau = t`.
pub fn exp_linear_integral(rate: f64, span: f64, p_start: f64, p_end: f64) -> f64 {
    let x = rate * span;
    // substitute w = t - tau: p(w) = p_end + (p_start - p_end) w / span
    // integral of e^{-rate w} p(w) over [0, span]
    span * (p_end * phi1(x) + (p_start - p_end) * (phi1(x) - phi2(x)))
}
