use std::collections::BTreeMap;
use std::f64::consts::PI;

use alpha_channel::averaging::*;
use alpha_channel::channel_model::{uniform_grid, ChannelGeometry, SineSpectrum};
use alpha_channel::kernel::KernelConfig;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit() -> (ChannelGeometry, KernelConfig) {
    let g = ChannelGeometry::new(1.0, 1.0, 1.0).unwrap();
    (g, KernelConfig::for_channel(&g, 1.0))
}

fn l2_distance(a: &SineSpectrum, b: &SineSpectrum) -> f64 {
    a.added(&b.scaled(-1.0)).unwrap().l2_norm()
}

#[test]
fn sinusoidal_drop_matches_the_time_stepping_oracle() {
    let (g, cfg) = unit();
    let p = PressureHistory::sinusoid(-1.0, 0.5, 2.0 * PI, 0.0, 1.5).unwrap();
    // the oracle starts from rest, so its start-up transient must decay below
    // the tolerance: ln(1e8) slowest-mode time constants
    let burn_in = (1e8f64).ln() / (PI * PI);
    let init = SineSpectrum::zeros(g, cfg.profile_k_max()).unwrap();
    let mut oracle = spectral_evolve(&g, 1.0, &p, &init, 0.0, burn_in, 2.5e-4).unwrap();
    let mut t = burn_in;
    for _ in 0..4 {
        let duhamel = duhamel_spectrum(&g, 1.0, &p, t, &cfg).unwrap();
        let gap = l2_distance(&duhamel, &oracle);
        assert!(gap < 1e-6 * duhamel.l2_norm(), "t = {t}: gap {gap:e}");
        oracle = spectral_evolve(&g, 1.0, &p, &oracle, t, t + 0.3, 2.5e-4).unwrap();
        t += 0.3;
    }
}

#[test]
fn sampled_drop_matches_the_time_stepping_oracle() {
    let (g, cfg) = unit();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let values: Vec<f64> = (0..=400).map(|_| -rng.gen_range(0.2..3.0)).collect();
    let p = PressureHistory::sampled(0.0, 0.01, values.clone(), 3.0).unwrap();
    // before t = 0 the drop is held at its first sample, so the oracle can
    // start from that steady state
    let (mu, _) = poiseuille_from_drop(&g, 1.0, values[0], &[0.5]).unwrap();
    let start = poiseuille_spectrum(&g, mu, cfg.profile_k_max()).unwrap();
    for &t in &[0.5, 2.0, 4.0] {
        let oracle = spectral_evolve(&g, 1.0, &p, &start, 0.0, t, 0.01).unwrap();
        let duhamel = duhamel_spectrum(&g, 1.0, &p, t, &cfg).unwrap();
        let gap = l2_distance(&duhamel, &oracle);
        assert!(gap < 1e-6 * duhamel.l2_norm(), "t = {t}: gap {gap:e}");
    }
}

#[test]
fn constant_forcing_settles_on_the_poiseuille_spectrum() {
    let (g, cfg) = unit();
    let p = PressureHistory::constant(-2.0, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let init = SineSpectrum::new(g, (0..cfg.profile_k_max()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let settled = spectral_evolve(&g, 1.0, &p, &init, 0.0, 4.0, 0.05).unwrap();
    let (mu, _) = poiseuille_from_drop(&g, 1.0, -2.0, &[0.5]).unwrap();
    let exact = poiseuille_spectrum(&g, mu, cfg.profile_k_max()).unwrap();
    let worst = (1..=exact.k_max())
        .map(|k| (settled.coefficient(k) - exact.coefficient(k)).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-9, "{worst:e}");
    // the limit is the nonzero parabola with peak mu h^2 / 4
    assert!((exact.eval(0.5).unwrap() - 0.25).abs() < 1e-6);
}

#[test]
fn duhamel_profile_reproduces_the_parabola() {
    let (g, cfg) = unit();
    let p = PressureHistory::constant(-2.0, 2.0).unwrap();
    let grid = uniform_grid(&g, 257).unwrap();
    let profile = duhamel_mean_velocity(&g, 1.0, &p, 0.0, &grid, &cfg).unwrap();
    let worst = grid
        .iter()
        .zip(profile.values())
        .map(|(x, v)| (v - x * (1.0 - x)).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst:e}");
    let zero = duhamel_mean_velocity(&g, 1.0, &PressureHistory::zero_unchecked(), 1.0, &grid, &cfg).unwrap();
    assert_eq!(zero.max_abs(), 0.0);
}

#[test]
fn poiseuille_mu_cancels() {
    for &(pi1, nu) in &[(1.0, 1.0), (2.5, 0.3), (0.1, 7.0)] {
        let g = ChannelGeometry::new(1.0, pi1, 1.0).unwrap();
        let (mu, profile) = poiseuille_from_drop(&g, nu, -2.0 * pi1 * nu, &uniform_grid(&g, 5).unwrap()).unwrap();
        assert!((mu - 1.0).abs() < 1e-15);
        assert!((profile.values()[2] - 0.25).abs() < 1e-15);
    }
}

#[test]
fn generic_differences_decay_at_the_slowest_mode_rate() {
    let (g, _) = unit();
    let p = PressureHistory::sinusoid(-1.0, 0.5, 2.0 * PI, 0.3, 1.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = SineSpectrum::new(g, (0..31).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let b = SineSpectrum::new(g, (0..31).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let r = contraction_decay_check(&g, 1.0, &p, &a, &b, 1.0).unwrap();
    assert!(r.fitted_rate >= r.poincare_rate);
    assert!((r.fitted_rate - r.slowest_mode_rate).abs() <= 0.01 * r.slowest_mode_rate, "{}", r.fitted_rate);
}

#[test]
fn spanwise_mean_decays_without_forcing() {
    let (g, _) = unit();
    let zero = PressureHistory::zero_unchecked();
    let u2 = SineSpectrum::new(g, vec![0.4, -0.2, 0.1, 0.05]).unwrap();
    let rest = SineSpectrum::zeros(g, 4).unwrap();
    let r = contraction_decay_check(&g, 1.0, &zero, &u2, &rest, 2.0).unwrap();
    assert!(r.fitted_rate >= r.poincare_rate);
    let later = spectral_evolve(&g, 1.0, &zero, &u2, 0.0, 4.0, 0.1).unwrap();
    assert!(later.l2_norm() < 1e-16);
}

fn random_field(rng: &mut ChaCha8Rng, geom: ChannelGeometry, admissible: bool) -> PeriodicField {
    let mut modes = BTreeMap::new();
    let z = Complex64::new(0.0, 0.0);
    let c = |rng: &mut ChaCha8Rng| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    for k1 in 0..=2i64 {
        for k2 in -2..=2i64 {
            if k1 == 0 && k2 < 0 {
                continue;
            }
            for k3 in 1..=3u32 {
                let u = if admissible {
                    if k2 != 0 {
                        let u1 = c(rng);
                        let u2 = -(k1 as f64 * geom.pi2()) / (k2 as f64 * geom.pi1()) * u1;
                        [u1, u2, z]
                    } else if k1 == 0 {
                        [c(rng), c(rng), z]
                    } else {
                        [z, c(rng), z]
                    }
                } else {
                    [c(rng), c(rng), c(rng)]
                };
                let u = if k1 == 0 && k2 == 0 { u.map(|v| Complex64::new(v.re, 0.0)) } else { u };
                modes.insert((k1, k2, k3), u);
                if k1 != 0 || k2 != 0 {
                    modes.insert((-k1, -k2, k3), u.map(|v| v.conj()));
                }
            }
        }
    }
    PeriodicField::new(geom, modes).unwrap()
}

#[test]
fn admissible_fields_are_divergence_free_pointwise() {
    let geom = ChannelGeometry::new(1.5, 2.0, 3.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let f = random_field(&mut rng, geom, true);
        let report = divergence_constraint_check(&f);
        assert!(report.admissible(1e-12), "{report:?}");
        assert!(f.modes().values().all(|u| u[2] == Complex64::new(0.0, 0.0)));
        for _ in 0..20 {
            let (x1, x2, x3) = (rng.gen_range(0.0..2.0), rng.gen_range(0.0..3.0), rng.gen_range(0.0..1.5));
            assert!(f.divergence(x1, x2, x3).unwrap().abs() < 1e-10);
        }
    }
}

#[test]
fn violations_have_the_predicted_size() {
    let geom = ChannelGeometry::new(1.5, 2.0, 3.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let f = random_field(&mut rng, geom, false);
    let report = divergence_constraint_check(&f);
    let normal = f
        .modes()
        .iter()
        .map(|(&(_, _, k3), u)| u[2].norm() * k3 as f64 * PI / 1.5)
        .fold(0.0, f64::max);
    assert_eq!(report.normal, normal);
    assert!(report.tangential > 0.0);
}

#[test]
fn fourier_plane_average_matches_grid_quadrature() {
    let geom = ChannelGeometry::new(1.0, 2.0, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x3 = uniform_grid(&geom, 11).unwrap();
    for _ in 0..5 {
        let f = random_field(&mut rng, geom, false);
        for comp in [Component::U1, Component::U2, Component::U3] {
            let spectral = f.reynolds_average(comp, &x3).unwrap();
            let gridded = GriddedField::from_fn(geom, 9, 9, x3.clone(), |a, b, c| f.sample(comp, a, b, c)).unwrap();
            let quad = gridded.reynolds_average().unwrap();
            for (s, q) in spectral.values().iter().zip(quad.values()) {
                assert!((s - q).abs() < 1e-10);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn duhamel_is_linear_in_the_pressure_history(
        a in prop::collection::vec(0.1..2.0f64, 30),
        b in prop::collection::vec(0.1..2.0f64, 30),
        t in 0.0..0.5f64,
    ) {
        let (g, cfg) = unit();
        let pa = PressureHistory::sampled(0.0, 0.02, a.iter().map(|v| -v).collect(), 2.0).unwrap();
        let pb = PressureHistory::sampled(0.0, 0.02, b.iter().map(|v| -v).collect(), 2.0).unwrap();
        let sum = PressureHistory::sampled(0.0, 0.02, a.iter().zip(&b).map(|(x, y)| -x - y).collect(), 4.0).unwrap();
        let sa = duhamel_spectrum(&g, 1.0, &pa, t, &cfg).unwrap();
        let sb = duhamel_spectrum(&g, 1.0, &pb, t, &cfg).unwrap();
        let ss = duhamel_spectrum(&g, 1.0, &sum, t, &cfg).unwrap();
        let gap = l2_distance(&sa.added(&sb).unwrap(), &ss);
        prop_assert!(gap <= 1e-12 * ss.l2_norm());
    }
}
