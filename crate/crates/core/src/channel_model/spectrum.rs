use super::{ChannelGeometry, MeanProfile};
use crate::error::{ensure, Result};
use crate::numerics::{compensated_sum, cos_pi, sin_pi, uniform_spacing};

/// Coefficients of a profile on the orthonormal basis
/// `sqrt(2/h) sin(pi k (x3 - x3_lower) / h)`, `k = 1..=k_max`.
///
/// Every finite sine series vanishes at both walls, so the no-slip condition
/// holds by construction. `tail_bound` optionally records an upper bound on the
/// L2 norm of the discarded modes `k > k_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SineSpectrum {
    geometry: ChannelGeometry,
    coeffs: Vec<f64>,
    tail_bound: f64,
}

impl SineSpectrum {
    pub fn new(geometry: ChannelGeometry, coeffs: Vec<f64>) -> Result<Self> {
        ensure!(!coeffs.is_empty(), Validation, "a sine spectrum needs at least one mode");
        ensure!(
            coeffs.iter().all(|c| c.is_finite()),
            Validation,
            "sine spectrum has non-finite coefficients"
        );
        Ok(Self { geometry, coeffs, tail_bound: 0.0 })
    }

    pub fn zeros(geometry: ChannelGeometry, k_max: usize) -> Result<Self> {
        Self::new(geometry, vec![0.0; k_max])
    }

    /// A single mode `k` with coefficient `c`.
    pub fn single_mode(geometry: ChannelGeometry, k_max: usize, k: usize, c: f64) -> Result<Self> {
        ensure!(k >= 1 && k <= k_max, Domain, "mode {k} outside 1..={k_max}");
        let mut coeffs = vec![0.0; k_max];
        coeffs[k - 1] = c;
        Self::new(geometry, coeffs)
    }

    pub(crate) fn with_tail_bound(mut self, tail_bound: f64) -> Self {
        self.tail_bound = tail_bound;
        self
    }

    pub fn geometry(&self) -> &ChannelGeometry {
        &self.geometry
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn k_max(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of mode `k` (zero beyond `k_max`).
    pub fn coefficient(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        self.coeffs.get(k - 1).copied().unwrap_or(0.0)
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// `||profile||_{L2}` by Parseval.
    pub fn l2_norm(&self) -> f64 {
        compensated_sum(self.coeffs.iter().map(|c| c * c)).sqrt()
    }

    /// Mode-wise map `c_k -> f(k, c_k)`.
    pub fn map_modes(&self, f: impl Fn(usize, f64) -> f64) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(i, &c)| f(i + 1, c)).collect();
        Self { geometry: self.geometry, coeffs, tail_bound: self.tail_bound }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.map_modes(|_, c| factor * c);
        out.tail_bound = self.tail_bound * factor.abs();
        out
    }

    /// Sum of two spectra on the same channel; the shorter one is zero-padded.
    pub fn added(&self, other: &SineSpectrum) -> Result<Self> {
        ensure!(
            self.geometry == other.geometry,
            Validation,
            "cannot add spectra on different channels"
        );
        let n = self.k_max().max(other.k_max());
        let coeffs = (1..=n).map(|k| self.coefficient(k) + other.coefficient(k)).collect();
        Ok(Self {
            geometry: self.geometry,
            coeffs,
            tail_bound: self.tail_bound + other.tail_bound,
        })
    }

    fn basis_scale(&self) -> f64 {
        (2.0 / self.geometry.h()).sqrt()
    }

    fn series(&self, x3: f64, order: u8) -> Result<f64> {
        let s = self.geometry.local(x3)? / self.geometry.h();
        let wave = std::f64::consts::PI / self.geometry.h();
        let sum = compensated_sum(self.coeffs.iter().enumerate().map(|(i, &c)| {
            let k = (i + 1) as f64;
            match order {
                0 => c * sin_pi(k * s),
                1 => c * k * wave * cos_pi(k * s),
                _ => -c * (k * wave) * (k * wave) * sin_pi(k * s),
            }
        }));
        Ok(self.basis_scale() * sum)
    }

    /// Profile value at `x3`.
    pub fn eval(&self, x3: f64) -> Result<f64> {
        self.series(x3, 0)
    }

    /// Termwise first derivative in `x3`.
    pub fn derivative(&self, x3: f64) -> Result<f64> {
        self.series(x3, 1)
    }

    /// Termwise second derivative in `x3`.
    pub fn second_derivative(&self, x3: f64) -> Result<f64> {
        self.series(x3, 2)
    }

    /// Samples the series on `grid` as a [`MeanProfile`] stamped with `time`.
    pub fn sample(&self, grid: &[f64], time: f64) -> Result<MeanProfile> {
        let values = grid.iter().map(|&x| self.eval(x)).collect::<Result<Vec<_>>>()?;
        MeanProfile::new(grid.to_vec(), values, time)
    }

    /// Exact sine coefficients of a wall-anchored profile on a uniform grid of
    /// `n + 1` points, via the type-I discrete sine transform. Returns modes
    /// `1..n`; the transform is exact for sine polynomials of degree below `n`.
    pub fn from_uniform_profile(geometry: ChannelGeometry, profile: &MeanProfile) -> Result<Self> {
        profile.require_wall_anchored(&geometry)?;
        ensure!(
            uniform_spacing(profile.grid()).is_some(),
            Resolution,
            "discrete sine transform needs a uniform grid"
        );
        let n = profile.len() - 1;
        ensure!(n >= 2, Resolution, "discrete sine transform needs at least 3 samples");
        let h = geometry.h();
        let f = profile.values();
        let scale = (2.0 / h).sqrt() * h / n as f64;
        let coeffs = (1..n)
            .map(|k| {
                scale
                    * compensated_sum((1..n).map(|j| {
                        // k*j/n reduced mod 2n keeps the sine argument exact
                        let arg = ((k * j) % (2 * n)) as f64 / n as f64;
                        f[j] * sin_pi(arg)
                    }))
            })
            .collect();
        Self::new(geometry, coeffs)
    }
}
