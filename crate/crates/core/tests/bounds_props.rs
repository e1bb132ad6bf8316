use std::f64::consts::PI;

use alpha_channel::averaging::PressureHistory;
use alpha_channel::bounds::*;
use alpha_channel::channel_model::{uniform_grid, ChannelGeometry, SineSpectrum};
use alpha_channel::kernel::KernelConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit() -> (ChannelGeometry, KernelConfig) {
    let g = ChannelGeometry::new(1.0, 1.0, 1.0).unwrap();
    (g, KernelConfig::for_channel(&g, 1.0))
}

#[test]
fn random_admissible_histories_respect_the_reynolds_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..500 {
        let h = rng.gen_range(0.5..2.0);
        let g = ChannelGeometry::new(h, rng.gen_range(0.5..2.0), 1.0).unwrap();
        let nu = rng.gen_range(0.5..2.0);
        let cfg = KernelConfig::for_channel(&g, nu).with_profile_modes(64).unwrap();
        let p_bar = rng.gen_range(0.1..10.0);
        let n = rng.gen_range(2..40);
        let values: Vec<f64> = (0..n).map(|_| -p_bar * rng.gen_range(0.01..=1.0)).collect();
        let dt = rng.gen_range(0.01..0.2);
        let p = PressureHistory::sampled(0.0, dt, values, p_bar).unwrap();
        let window = rng.gen_range(0.1..5.0);
        let grid = uniform_grid(&g, 129).unwrap();
        let r = reynolds_bound_check(&g, nu, &p, window, &grid, &cfg).unwrap();
        assert!(r.satisfied, "case {case}: Re {} > bound {}", r.re, r.bound);
        assert!(r.re >= 0.0 && r.bound > 0.0);
    }
}

#[test]
fn constant_profile_is_its_own_time_average() {
    let (g, cfg) = unit();
    let p = PressureHistory::constant(-2.0, 2.0).unwrap();
    let grid = uniform_grid(&g, 33).unwrap();
    let a = time_averaged_profile(&g, 1.0, &p, 0.3, &grid, &cfg).unwrap();
    let b = time_averaged_profile(&g, 1.0, &p, 30.0, &grid, &cfg).unwrap();
    for ((x, u), v) in grid.iter().zip(a.values()).zip(b.values()) {
        assert!((u - x * (1.0 - x)).abs() < 1e-6);
        assert!((u - v).abs() < 1e-14);
    }
    let zero = time_averaged_profile(&g, 1.0, &PressureHistory::zero_unchecked(), 1.0, &grid, &cfg).unwrap();
    assert_eq!(zero.max_abs(), 0.0);
}

#[test]
fn long_averages_of_a_sinusoid_approach_the_mean_parabola() {
    let (g, cfg) = unit();
    let p = PressureHistory::sinusoid(-2.0, 1.0, 3.0, 0.4, 3.0).unwrap();
    let grid = uniform_grid(&g, 33).unwrap();
    let mut last = f64::INFINITY;
    for &window in &[10.0, 100.0, 1000.0] {
        let u = time_averaged_profile(&g, 1.0, &p, window, &grid, &cfg).unwrap();
        let err = grid.iter().zip(u.values()).map(|(x, v)| (v - x * (1.0 - x)).abs()).fold(0.0, f64::max);
        assert!(err < last);
        last = err;
    }
    assert!(last < 1e-3);
}

#[test]
fn reynolds_number_scales_linearly_with_the_drop() {
    let (g, cfg) = unit();
    let grid = uniform_grid(&g, 257).unwrap();
    let one = reynolds_bound_check(&g, 1.0, &PressureHistory::constant(-1.0, 1.0).unwrap(), 1.0, &grid, &cfg).unwrap();
    let two = reynolds_bound_check(&g, 1.0, &PressureHistory::constant(-2.0, 2.0).unwrap(), 1.0, &grid, &cfg).unwrap();
    assert!((two.re - 2.0 * one.re).abs() < 1e-14);
    assert!((two.bound - 2.0 * one.bound).abs() < 1e-15);
    assert!((two.re - 1.0 / 30f64.sqrt()).abs() < 1e-6);
    assert!(two.re <= 2.0 / (PI * PI));
}

#[test]
fn quadrature_and_parseval_norms_agree() {
    let g = ChannelGeometry::new(2.0, 1.0, 1.0).unwrap();
    let grid = uniform_grid(&g, 257).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        let coeffs: Vec<f64> = (1..=20).map(|k| rng.gen_range(-1.0..1.0) / (k as f64).powi(2)).collect();
        let s = SineSpectrum::new(g, coeffs).unwrap();
        let profile = s.sample(&grid, 0.0).unwrap();
        let quad = reynolds_number(&profile, &g, 1.0).unwrap();
        let parseval = reynolds_number_spectral(&s, 1.0).unwrap();
        assert!((quad - parseval).abs() < 1e-8 * parseval);
    }
    let zero = SineSpectrum::zeros(g, 3).unwrap().sample(&grid, 0.0).unwrap();
    assert_eq!(reynolds_number(&zero, &g, 1.0).unwrap(), 0.0);
    let even = SineSpectrum::zeros(g, 3).unwrap().sample(&uniform_grid(&g, 256).unwrap(), 0.0).unwrap();
    assert!(matches!(reynolds_number(&even, &g, 1.0), Err(alpha_channel::Error::Resolution(_))));
}

#[test]
fn odd_series_partial_sums_increase_to_pi_squared_over_eight() {
    let limit = PI * PI / 8.0;
    let mut prev = 0.0;
    for k in [1, 2, 5, 10, 100, 1000, 10_000] {
        let s = odd_series_sum(k).unwrap();
        assert!(s > prev && s < limit);
        assert!(limit - s <= 1.0 / (2.0 * (2 * k - 1) as f64));
        prev = s;
    }
    assert!((odd_series_sum(1_000_000).unwrap() - limit).abs() < 5e-7);
}

// Natural cubic spline through (knots[i], values[i]), sampled at x.
fn natural_spline(knots: &[f64], values: &[f64], x: &[f64]) -> Vec<f64> {
    let n = knots.len() - 1;
    let hs: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
    // second derivatives m with m[0] = m[n] = 0, tridiagonal solve
    let mut diag = vec![0.0; n + 1];
    let mut rhs = vec![0.0; n + 1];
    let mut upper = vec![0.0; n + 1];
    for i in 1..n {
        diag[i] = 2.0 * (hs[i - 1] + hs[i]);
        upper[i] = hs[i];
        rhs[i] = 6.0 * ((values[i + 1] - values[i]) / hs[i] - (values[i] - values[i - 1]) / hs[i - 1]);
    }
    let mut m = vec![0.0; n + 1];
    for i in 2..n {
        let w = hs[i - 1] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    for i in (1..n).rev() {
        m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    }
    x.iter()
        .map(|&xv| {
            let i = knots.windows(2).position(|w| xv <= w[1]).unwrap_or(n - 1);
            let (a, b, hi) = (knots[i], knots[i + 1], hs[i]);
            let (s, t) = ((b - xv) / hi, (xv - a) / hi);
            m[i] * s.powi(3) * hi * hi / 6.0
                + m[i + 1] * t.powi(3) * hi * hi / 6.0
                + (values[i] - m[i] * hi * hi / 6.0) * s
                + (values[i + 1] - m[i + 1] * hi * hi / 6.0) * t
        })
        .collect()
}

#[test]
fn random_splines_satisfy_poincare() {
    let g = ChannelGeometry::new(1.3, 1.0, 1.0).unwrap();
    let grid = uniform_grid(&g, 513).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let n = rng.gen_range(3..12);
        let knots: Vec<f64> = (0..=n).map(|i| 1.3 * i as f64 / n as f64).collect();
        let mut values: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        values[0] = 0.0;
        values[n] = 0.0;
        let samples = natural_spline(&knots, &values, &grid);
        let r = poincare_check(&grid, &samples, 1e-3).unwrap();
        assert!(r.satisfied, "{r:?}");
    }
}

#[test]
fn sine_attains_ratio_pi_squared() {
    let g = ChannelGeometry::new(1.0, 1.0, 1.0).unwrap();
    let grid = uniform_grid(&g, 257).unwrap();
    let values: Vec<f64> = grid.iter().map(|x| (PI * x).sin()).collect();
    let r = poincare_check(&grid, &values, 0.0).unwrap();
    assert!((r.lhs / r.rhs / (PI * PI) - 1.0).abs() < 1e-8);
}
