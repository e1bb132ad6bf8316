use std::f64::consts::PI;

use alpha_channel::channel_model::ChannelGeometry;
use alpha_channel::kernel::*;
use proptest::prelude::*;

fn unit() -> (ChannelGeometry, KernelConfig) {
    let g = ChannelGeometry::new(1.0, 1.0, 1.0).unwrap();
    (g, KernelConfig::for_channel(&g, 1.0))
}

// Plain double-precision sum of the first `modes` odd terms, written directly from the series.
fn naive_kernel(h: f64, pi1: f64, nu: f64, x: f64, t: f64, modes: usize) -> f64 {
    (0..modes)
        .map(|j| {
            let k = (2 * j + 1) as f64;
            -4.0 / (pi1 * k * PI) * (-nu * (PI * k / h).powi(2) * t).exp() * (PI * k * x / h).sin()
        })
        .sum()
}

#[test]
fn time_integral_matches_closed_form_on_a_fine_grid() {
    let (g, cfg) = unit();
    let mut worst: f64 = 0.0;
    for i in 0..=100 {
        let x = i as f64 / 100.0;
        let series = kernel_time_integral(&g, 1.0, x, &cfg).unwrap();
        let closed = -x * (1.0 - x) / 2.0;
        if closed == 0.0 {
            assert_eq!(series, 0.0);
        } else {
            worst = worst.max(((series - closed) / closed).abs());
        }
    }
    assert!(worst < 1e-8, "max relative error {worst:e}");
}

#[test]
fn adaptive_sum_agrees_with_a_long_plain_sum() {
    let g = ChannelGeometry::new(2.0, 1.5, 1.0).unwrap();
    let cfg = KernelConfig::for_channel(&g, 0.7);
    for &(x, t) in &[(0.3, 0.01), (1.1, 0.2), (1.9, 0.05)] {
        let fast = eval_kernel_detailed(&g, 0.7, x, t, &cfg).unwrap();
        let slow = naive_kernel(2.0, 1.5, 0.7, x, t, 400);
        assert!((fast.value - slow).abs() <= 1e-10 * slow.abs() + 1e-15, "x={x} t={t}");
        assert_eq!(fast.k_last % 2, 1);
        assert!(fast.tail_bound <= 1e-10 * fast.value.abs());
    }
}

#[test]
fn heat_residual_finite_differences_converge_at_second_order() {
    let (g, cfg) = unit();
    let steps = [(0.02, 0.004), (0.01, 0.002), (0.005, 0.001)];
    let r: Vec<HeatResidual> = steps
        .iter()
        .map(|&(dx, dt)| kernel_heat_residual(&g, 1.0, 0.5, 0.1, &cfg, dx, dt).unwrap())
        .collect();
    for res in &r {
        assert!(res.analytic < 1e-12);
    }
    for w in r.windows(2) {
        let order = (w[0].finite_difference / w[1].finite_difference).log2();
        assert!(order >= 1.9, "observed order {order}");
    }
}

#[test]
fn h_derivative_residual_converges_at_second_order() {
    let (g, cfg) = unit();
    let coarse = kernel_h_derivative_check(&g, 1.0, 0.5, 0.2, &cfg, 1e-3).unwrap();
    let fine = kernel_h_derivative_check(&g, 1.0, 0.5, 0.2, &cfg, 5e-4).unwrap();
    assert!((coarse / fine).log2() >= 1.9, "{coarse:e} {fine:e}");
    assert!(coarse < 1e-5);
}

#[test]
fn midplane_h_derivative_only_sees_the_time_term() {
    let (g, cfg) = unit();
    // at x = h/2 the x-derivative term vanishes, so the check reduces to dK/dh = -(2t/h) dK/dt
    let k_last = 41;
    assert!(kernel_dx_termwise(&g, 1.0, 0.5, 0.2, k_last).abs() < 1e-15);
    let dh = 1e-4;
    let up = g.with_height(1.0 + dh).unwrap();
    let down = g.with_height(1.0 - dh).unwrap();
    let fd = (eval_kernel_fixed(&up, 1.0, 0.5, 0.2, k_last) - eval_kernel_fixed(&down, 1.0, 0.5, 0.2, k_last))
        / (2.0 * dh);
    let rhs = -0.4 * kernel_dt_termwise(&g, 1.0, 0.5, 0.2, k_last);
    assert!((fd - rhs).abs() < 1e-7);
    assert!(kernel_h_derivative_check(&g, 1.0, 0.5, 0.2, &cfg, 1e-4).unwrap() < 1e-7);
}

#[test]
fn parabola_series_at_midplane() {
    let (g, cfg) = unit();
    assert!((parabola_sine_series(&g, 0.5, &cfg).unwrap() - 0.25).abs() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_symmetric_about_the_midplane(x in 0.0..1.0f64, log_t in -5.0..0.5f64) {
        let (g, cfg) = unit();
        let t = 10f64.powf(log_t);
        let a = eval_kernel(&g, 1.0, x, t, &cfg).unwrap();
        let b = eval_kernel(&g, 1.0, 1.0 - x, t, &cfg).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()) + 1e-300);
    }

    #[test]
    fn kernel_scales_inversely_with_the_period(x in 0.01..0.99f64, t in 1e-4..1.0f64, c in 0.1..10.0f64) {
        let g1 = ChannelGeometry::new(1.0, 1.0, 1.0).unwrap();
        let gc = ChannelGeometry::new(1.0, c, 1.0).unwrap();
        let cfg = KernelConfig::for_channel(&g1, 1.0);
        let a = eval_kernel(&g1, 1.0, x, t, &cfg).unwrap();
        let b = eval_kernel(&gc, 1.0, x, t, &cfg).unwrap();
        prop_assert!((a / c - b).abs() <= 1e-12 * a.abs() / c);
    }

    #[test]
    fn only_odd_modes_contribute(x in 0.0..1.0f64, t in 1e-4..1.0f64, m in 1usize..60) {
        let (g, _) = unit();
        // adding an even mode index to the truncation leaves the sum unchanged
        let odd = 2 * m - 1;
        prop_assert_eq!(eval_kernel_fixed(&g, 1.0, x, t, odd), eval_kernel_fixed(&g, 1.0, x, t, odd + 1));
        prop_assert_eq!(mode_coefficient(1.3, 2 * m), 0.0);
    }

    #[test]
    fn termwise_heat_residual_vanishes(x in 0.02..0.98f64, t in 1e-4..1.0f64) {
        let (g, cfg) = unit();
        let r = kernel_heat_residual(&g, 1.0, x, t, &cfg, 0.01, t / 10.0).unwrap();
        prop_assert!(r.analytic < 1e-12, "{:?}", r);
    }
}

#[test]
fn termwise_heat_residual_is_below_round_off_at_moderate_times() {
    let (g, cfg) = unit();
    for &(x, t) in &[(0.1, 0.01), (0.5, 0.1), (0.77, 0.5)] {
        let r = kernel_heat_residual(&g, 1.0, x, t, &cfg, 0.01, t / 10.0).unwrap();
        assert!(r.analytic < 1e-12, "{r:?}");
    }
}
