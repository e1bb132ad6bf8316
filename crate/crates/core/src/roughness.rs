//! Wall roughness as a self-similar cascade of box-shaped rugosities.
//!
//! Generation `n` is a lattice of boxes of half-widths `delta_j / n`, height
//! `r1(0) r2(0) / (n^2 h)` and volume `vol_1 / n^4`, repeating with period
//! `pi_j / n` where `pi_j = Pi_j / N_j`. Its effect on the flow is
//! `e(n) = c1 / vol_n`. A selector pairs each generation with the sine mode of
//! matching length scale; summing the cascade's correction over generations
//! turns mode `k` of the mean velocity into `(1 + alpha^2 (k pi / h)^2)` times
//! itself, i.e. the averaged profile picks up the operator `1 - alpha^2 d^2/dx3^2`.

use std::f64::consts::PI;

use crate::channel_model::{helmholtz_multiplier, ChannelGeometry, SineSpectrum};
use crate::error::{ensure, Result};

/// Parameters of the rugosity cascade on the lower wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoughnessSpec {
    geometry: ChannelGeometry,
    c1: f64,
    h1: f64,
    delta1: f64,
    delta2: f64,
    r1_0: f64,
    r2_0: f64,
    n1: u32,
    n2: u32,
    n_max: usize,
}

/// Largest admissible `h1 / h`.
pub const MAX_RELATIVE_HEIGHT: f64 = 1e-2;

impl RoughnessSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        geometry: ChannelGeometry,
        c1: f64,
        h1: f64,
        delta1: f64,
        delta2: f64,
        r1_0: f64,
        r2_0: f64,
        n1: u32,
        n2: u32,
        n_max: usize,
    ) -> Result<Self> {
        for (name, v) in [("c1", c1), ("h1", h1), ("delta1", delta1), ("delta2", delta2), ("r1_0", r1_0), ("r2_0", r2_0)] {
            ensure!(v > 0.0 && v.is_finite(), Validation, "{name} must be positive, got {v}");
        }
        ensure!(n1 >= 1 && n2 >= 1, Validation, "N1 and N2 must be positive integers");
        ensure!(n_max >= 1, Validation, "n_max must be at least 1");
        let spec = Self { geometry, c1, h1, delta1, delta2, r1_0, r2_0, n1, n2, n_max };
        ensure!(
            2.0 * delta1 < spec.sub_period1(),
            Validation,
            "box width 2*delta1 = {} does not fit in the sub-period Pi1/N1 = {}",
            2.0 * delta1,
            spec.sub_period1()
        );
        ensure!(
            2.0 * delta2 < spec.sub_period2(),
            Validation,
            "box width 2*delta2 = {} does not fit in the sub-period Pi2/N2 = {}",
            2.0 * delta2,
            spec.sub_period2()
        );
        ensure!(
            h1 / geometry.h() <= MAX_RELATIVE_HEIGHT,
            Validation,
            "rugosity height scale must be small: h1/h = {} exceeds {MAX_RELATIVE_HEIGHT}",
            h1 / geometry.h()
        );
        Ok(spec)
    }

    /// Cascade depth that covers every mode up to `k_max` with margin: `4 k_max + 1`.
    pub fn default_n_max(k_max: usize) -> usize {
        4 * k_max + 1
    }

    pub fn geometry(&self) -> &ChannelGeometry {
        &self.geometry
    }
    pub fn c1(&self) -> f64 {
        self.c1
    }
    pub fn h1(&self) -> f64 {
        self.h1
    }
    pub fn delta1(&self) -> f64 {
        self.delta1
    }
    pub fn delta2(&self) -> f64 {
        self.delta2
    }
    pub fn r1_0(&self) -> f64 {
        self.r1_0
    }
    pub fn r2_0(&self) -> f64 {
        self.r2_0
    }
    pub fn n1(&self) -> u32 {
        self.n1
    }
    pub fn n2(&self) -> u32 {
        self.n2
    }
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn with_n_max(mut self, n_max: usize) -> Result<Self> {
        ensure!(n_max >= 1, Validation, "n_max must be at least 1");
        self.n_max = n_max;
        Ok(self)
    }

    /// `pi1 = Pi1 / N1`
    pub fn sub_period1(&self) -> f64 {
        self.geometry.pi1() / self.n1 as f64
    }

    /// `pi2 = Pi2 / N2`
    pub fn sub_period2(&self) -> f64 {
        self.geometry.pi2() / self.n2 as f64
    }

    /// Volume of one first-generation box, `4 delta1 delta2 r1(0) r2(0) / h`.
    pub fn vol1(&self) -> f64 {
        4.0 * self.delta1 * self.delta2 * self.r1_0 * self.r2_0 / self.geometry.h()
    }

    /// Fraction of the wall covered by boxes, `(2 delta1 / pi1)(2 delta2 / pi2)`.
    pub fn duty_factor(&self) -> f64 {
        (2.0 * self.delta1 / self.sub_period1()) * (2.0 * self.delta2 / self.sub_period2())
    }

    pub fn generation(&self, n: usize) -> Result<RugosityGeneration> {
        ensure!(n >= 1, Domain, "generation index must be at least 1");
        let n4 = (n as f64).powi(4);
        let vol1 = self.vol1();
        Ok(RugosityGeneration { n, volume: vol1 / n4, effect: self.c1 * n4 / vol1 })
    }
}

/// One generation of the cascade: box volume and effect `e(n) = c1 / vol_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RugosityGeneration {
    pub n: usize,
    pub volume: f64,
    pub effect: f64,
}

fn in_box(y: f64, period: f64, half_width: f64) -> bool {
    let centered = y - period * (y / period).round();
    centered.abs() < half_width
}

/// Height of generation `n` at `(x1, x2)`: `r1(n x1) r2(n x2) / (n^2 h)`.
pub fn rugosity_profile(spec: &RoughnessSpec, n: usize, x1: f64, x2: f64) -> Result<f64> {
    ensure!(n >= 1, Domain, "generation index must be at least 1");
    let nf = n as f64;
    if !in_box(nf * x1, spec.sub_period1(), spec.delta1) || !in_box(nf * x2, spec.sub_period2(), spec.delta2) {
        return Ok(0.0);
    }
    Ok(spec.r1_0 * spec.r2_0 / (nf * nf * spec.geometry.h()))
}

/// `eps_n = (h1 / h) sum_{l=1}^n 1 / l^2`, with `eps_0 = 0`.
pub fn epsilon_n(spec: &RoughnessSpec, n: usize) -> f64 {
    let partial: f64 = (1..=n).rev().map(|l| 1.0 / (l as f64 * l as f64)).sum();
    spec.h1 / spec.geometry.h() * partial
}

fn epsilon_table(spec: &RoughnessSpec, n_max: usize) -> Vec<f64> {
    let ratio = spec.h1 / spec.geometry.h();
    let mut table = Vec::with_capacity(n_max + 1);
    let mut partial = 0.0;
    table.push(0.0);
    for l in 1..=n_max {
        partial += 1.0 / (l as f64 * l as f64);
        table.push(ratio * partial);
    }
    table
}

// h/k in ((h - eps_n h)/n, (h - eps_{n-1} h)/(n - 1)], compared without division
fn selects(n: usize, k: usize, eps_n: f64, eps_prev: f64) -> bool {
    if n % 2 == 0 {
        return false;
    }
    let (nf, kf) = (n as f64, k as f64);
    let above_lower = nf > kf * (1.0 - eps_n);
    let below_upper = n == 1 || nf - 1.0 <= kf * (1.0 - eps_prev);
    above_lower && below_upper
}

/// Selector `s(n, k)`: 1 if `n` is odd and `h/k` lies in
/// `((1 - eps_n) h / n, (1 - eps_{n-1}) h / (n - 1)]` (upper end `+inf` for `n = 1`).
pub fn selector(spec: &RoughnessSpec, n: usize, k: usize) -> Result<u8> {
    ensure!(n >= 1 && k >= 1, Domain, "selector needs n >= 1 and k >= 1");
    Ok(selects(n, k, epsilon_n(spec, n), epsilon_n(spec, n - 1)) as u8)
}

/// Generations `n <= n_max` that the selector pairs with odd mode `k`.
pub fn matching_check(spec: &RoughnessSpec, k: usize, n_max: usize) -> Result<Vec<usize>> {
    ensure!(
        k % 2 == 1,
        Domain,
        "mode {k} is even; even modes carry a zero kernel coefficient and take no part in the matching"
    );
    ensure!(k <= n_max, Domain, "mode {k} exceeds the cascade depth n_max = {n_max}");
    let eps = epsilon_table(spec, n_max);
    Ok((1..=n_max).filter(|&n| selects(n, k, eps[n], eps[n - 1])).collect())
}

/// Whether odd mode `k` is matched to exactly generation `k`.
///
/// The selector picks `n = k` iff `k eps_{k-1} <= 1`, and then no other
/// generation; otherwise the matching set is empty.
pub fn matching_regime_holds(spec: &RoughnessSpec, k: usize) -> bool {
    k as f64 * epsilon_n(spec, k.saturating_sub(1)) <= 1.0
}

/// Aggregate roughness height entering the updated pressure drop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RoughnessAggregate {
    /// A given value.
    Direct(f64),
    /// Sum over generations `1..=n_max` of each generation's height averaged
    /// over its own cell.
    CellAveragedCascade,
}

pub fn roughness_aggregate(spec: &RoughnessSpec, aggregate: RoughnessAggregate) -> f64 {
    match aggregate {
        RoughnessAggregate::Direct(value) => value,
        RoughnessAggregate::CellAveragedCascade => {
            let base = spec.duty_factor() * spec.r1_0 * spec.r2_0 / spec.geometry.h();
            let sum: f64 = (1..=spec.n_max).rev().map(|n| 1.0 / (n as f64 * n as f64)).sum();
            base * sum
        }
    }
}

/// `p1 (1 + r / h)` with `r` the aggregate roughness height.
pub fn update_pressure_drop(spec: &RoughnessSpec, p1_at_t: f64, aggregate: RoughnessAggregate) -> f64 {
    p1_at_t * (1.0 + roughness_aggregate(spec, aggregate) / spec.geometry.h())
}

/// `alpha = sqrt(c1 h / (4 pi^2 delta1 delta2))`.
pub fn alpha_from_spec(spec: &RoughnessSpec) -> f64 {
    (spec.c1 * spec.geometry.h() / (4.0 * PI * PI * spec.delta1 * spec.delta2)).sqrt()
}

/// `alpha = sqrt(c1 r1(0) r2(0) / (pi^2 vol_1))`, algebraically equal to [`alpha_from_spec`].
pub fn alpha_from_volume(spec: &RoughnessSpec) -> f64 {
    (spec.c1 * spec.r1_0 * spec.r2_0 / (PI * PI * spec.vol1())).sqrt()
}

/// Result of [`apply_alpha_update`].
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaUpdate {
    pub output: SineSpectrum,
    pub alpha: f64,
    /// Net multiplier applied to each mode `1..=k_max`.
    pub multipliers: Vec<f64>,
    /// The multipliers obtained if the cascade heights carried the plane
    /// average's duty factor instead of `r1(0) r2(0)`.
    pub literal_average_multipliers: Vec<f64>,
    /// Odd modes whose matching set is not `{k}`, with the set found.
    pub unmatched_modes: Vec<(usize, Vec<usize>)>,
}

/// Applies the cascade's roughness correction to a mean-velocity spectrum.
///
/// Odd mode `k` is multiplied by `1 + sum_n s(n, k) e(n) H_n / h`, where
/// `H_n = r1(0) r2(0) / (n^2 h)` is the generation height; when the selector
/// matches `k` to `n = k` alone this is exactly `1 + alpha^2 (k pi / h)^2`.
/// Even modes get the Helmholtz multiplier directly, since the selector's
/// parity factor never reaches them.
pub fn apply_alpha_update(profile: &SineSpectrum, spec: &RoughnessSpec) -> Result<AlphaUpdate> {
    ensure!(
        profile.geometry().h() == spec.geometry.h(),
        Validation,
        "profile and roughness spec describe channels of different height"
    );
    let h = spec.geometry.h();
    let alpha = alpha_from_spec(spec);
    let n_max = spec.n_max;
    let eps = epsilon_table(spec, n_max);
    let base_height = spec.r1_0 * spec.r2_0 / h;
    let duty = spec.duty_factor();
    let vol1 = spec.vol1();

    let mut multipliers = Vec::with_capacity(profile.k_max());
    let mut literal = Vec::with_capacity(profile.k_max());
    let mut unmatched = Vec::new();
    for k in 1..=profile.k_max() {
        if k % 2 == 0 {
            let m = helmholtz_multiplier(alpha, h, k);
            multipliers.push(m);
            literal.push(1.0 + duty * (m - 1.0));
            continue;
        }
        let matched: Vec<usize> = (1..=n_max).filter(|&n| selects(n, k, eps[n], eps[n - 1])).collect();
        // e(n) H_n / h = c1 n^2 r1(0) r2(0) / (vol_1 h^2)
        let correction: f64 = matched
            .iter()
            .map(|&n| {
                let nf = n as f64;
                (spec.c1 * nf.powi(4) / vol1) * (base_height / (nf * nf)) / h
            })
            .sum();
        if matched != [k] {
            unmatched.push((k, matched));
        }
        multipliers.push(1.0 + correction);
        literal.push(1.0 + duty * correction);
    }
    let output = profile.map_modes(|k, c| multipliers[k - 1] * c);
    Ok(AlphaUpdate { output, alpha, multipliers, literal_average_multipliers: literal, unmatched_modes: unmatched })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_with(h1: f64) -> RoughnessSpec {
        let g = ChannelGeometry::new(1.0, 1.0, 1.0).unwrap();
        RoughnessSpec::new(g, 1e-3, h1, 0.1, 0.1, 0.05, 0.05, 2, 2, 401).unwrap()
    }

    #[test]
    fn spec_validation() {
        let g = ChannelGeometry::new(1.0, 1.0, 1.0).unwrap();
        assert!(RoughnessSpec::new(g, 1e-3, 0.5, 0.1, 0.1, 0.05, 0.05, 2, 2, 10).is_err());
        assert!(RoughnessSpec::new(g, 1e-3, 1e-3, 0.3, 0.1, 0.05, 0.05, 2, 2, 10).is_err());
        assert!(RoughnessSpec::new(g, 0.0, 1e-3, 0.1, 0.1, 0.05, 0.05, 2, 2, 10).is_err());
        assert!(RoughnessSpec::new(g, 1e-3, 1e-2, 0.1, 0.1, 0.05, 0.05, 2, 2, 10).is_ok());
    }

    #[test]
    fn profile_heights() {
        let s = spec_with(1e-3);
        assert_eq!(rugosity_profile(&s, 1, 0.0, 0.0).unwrap(), 0.05 * 0.05);
        assert_eq!(rugosity_profile(&s, 3, 0.0, 0.0).unwrap(), 0.05 * 0.05 / 9.0);
        // half a sub-period away from the box centre
        assert_eq!(rugosity_profile(&s, 1, 0.25, 0.0).unwrap(), 0.0);
        assert_eq!(rugosity_profile(&s, 3, 0.25, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn generations_scale_as_n_to_the_fourth() {
        let s = spec_with(1e-3);
        for n in 1..=50 {
            let g = s.generation(n).unwrap();
            let n4 = (n as f64).powi(4);
            assert!((g.volume * n4 - s.vol1()).abs() <= 1e-15 * s.vol1());
            assert!((g.effect * g.volume - s.c1()).abs() <= 1e-15 * s.c1());
        }
    }

    #[test]
    fn epsilon_values() {
        let s = spec_with(1e-3);
        assert_eq!(epsilon_n(&s, 0), 0.0);
        assert!((epsilon_n(&s, 1) - 1e-3).abs() < 1e-18);
        assert!(epsilon_n(&s, 10_000) < 1e-3 * PI * PI / 6.0);
    }

    #[test]
    fn selector_examples() {
        let s = spec_with(1e-3);
        assert_eq!(selector(&s, 5, 5).unwrap(), 1);
        assert_eq!(selector(&s, 3, 7).unwrap(), 0);
        assert_eq!(selector(&s, 1, 1).unwrap(), 1);
        for k in 1..20 {
            assert_eq!(selector(&s, 4, k).unwrap(), 0);
        }
        assert_eq!(matching_check(&s, 5, 200).unwrap(), vec![5]);
        assert!(matching_check(&s, 4, 200).is_err());
    }

    #[test]
    fn matching_fails_beyond_its_regime() {
        // at h1/h = 1e-2 the selector misses n = k once k eps_{k-1} > 1
        let s = spec_with(1e-2);
        assert!(matching_regime_holds(&s, 61));
        assert_eq!(matching_check(&s, 61, 200).unwrap(), vec![61]);
        assert!(!matching_regime_holds(&s, 63));
        assert!(matching_check(&s, 63, 200).unwrap().is_empty());
    }

    #[test]
    fn alpha_formulas() {
        let g = ChannelGeometry::new(1.0, 4.0, 4.0).unwrap();
        let s = RoughnessSpec::new(g, PI * PI, 1e-3, 0.5, 0.5, 0.2, 0.3, 2, 2, 10).unwrap();
        assert!((alpha_from_spec(&s) - 1.0).abs() < 1e-15);
        assert!((alpha_from_volume(&s) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pressure_update() {
        let s = spec_with(1e-3);
        assert_eq!(update_pressure_drop(&s, -2.0, RoughnessAggregate::Direct(0.0)), -2.0);
        assert_eq!(update_pressure_drop(&s, -2.0, RoughnessAggregate::Direct(1.0)), -4.0);
        assert!((update_pressure_drop(&s, -2.0, RoughnessAggregate::Direct(0.1)) + 2.2).abs() < 1e-15);
        let cascade = roughness_aggregate(&s, RoughnessAggregate::CellAveragedCascade);
        assert!(cascade > 0.0 && cascade < s.duty_factor() * 0.05 * 0.05 * PI * PI / 6.0);
    }

    #[test]
    fn first_mode_multiplier() {
        let g = ChannelGeometry::new(1.0, 4.0, 4.0).unwrap();
        let s = RoughnessSpec::new(g, PI * PI, 1e-3, 0.5, 0.5, 0.2, 0.3, 2, 2, 21).unwrap();
        let profile = SineSpectrum::new(g, vec![1.0, 1.0, 1.0]).unwrap();
        let up = apply_alpha_update(&profile, &s).unwrap();
        assert!((up.multipliers[0] - (1.0 + PI * PI)).abs() < 1e-12 * (1.0 + PI * PI));
        assert!(up.unmatched_modes.is_empty());
    }
}
