use super::ChannelGeometry;
use crate::error::{ensure, Error, Result};
use crate::numerics::{simpson, uniform_spacing};

/// How a profile was produced, when it has a closed form.
///
/// Operations that need derivatives use the closed form instead of finite
/// differences when it is available.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileSource {
    Poiseuille { geometry: ChannelGeometry, b: f64 },
    NsAlpha { geometry: ChannelGeometry, alpha: f64, a1: f64, a2: f64 },
}

/// A wall-normal velocity profile `<u1(t)>(x3)` sampled on a grid.
///
/// The grid is strictly increasing and lies inside the channel. A profile whose
/// grid reaches both walls is *wall-anchored*; such profiles must vanish at the
/// walls, which [`MeanProfile::require_wall_anchored`] checks.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanProfile {
    grid: Vec<f64>,
    values: Vec<f64>,
    time: f64,
    source: Option<ProfileSource>,
}

impl MeanProfile {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, time: f64) -> Result<Self> {
        ensure!(!grid.is_empty(), Validation, "profile grid is empty");
        ensure!(
            grid.len() == values.len(),
            Validation,
            "grid has {} samples but values has {}",
            grid.len(),
            values.len()
        );
        ensure!(
            grid.iter().chain(values.iter()).all(|v| v.is_finite()),
            Validation,
            "profile contains non-finite samples"
        );
        ensure!(
            grid.windows(2).all(|w| w[1] > w[0]),
            Validation,
            "profile grid must be strictly increasing"
        );
        Ok(Self { grid, values, time, source: None })
    }

    pub(crate) fn with_source(mut self, source: ProfileSource) -> Self {
        self.source = Some(source);
        self
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn source(&self) -> Option<&ProfileSource> {
        self.source.as_ref()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Checks that the grid spans exactly the walls and that the no-slip
    /// condition holds there.
    pub fn require_wall_anchored(&self, geom: &ChannelGeometry) -> Result<()> {
        let slack = 1e-12 * geom.h();
        let first = self.grid[0];
        let last = self.grid[self.grid.len() - 1];
        ensure!(
            (first - geom.x3_lower()).abs() <= slack && (last - geom.x3_upper()).abs() <= slack,
            Validation,
            "profile grid [{first}, {last}] does not coincide with the walls [{}, {}]",
            geom.x3_lower(),
            geom.x3_upper()
        );
        let tol = 1e-10 * self.max_abs().max(f64::MIN_POSITIVE);
        let (v0, v1) = (self.values[0], self.values[self.values.len() - 1]);
        ensure!(
            v0.abs() <= tol && v1.abs() <= tol,
            Validation,
            "no-slip violated: wall values {v0} and {v1}"
        );
        Ok(())
    }

    /// Uniform spacing of the grid, or a resolution error.
    pub fn uniform_dx(&self) -> Result<f64> {
        uniform_spacing(&self.grid)
            .ok_or_else(|| Error::Resolution("profile grid is not uniform".into()))
    }

    /// `||profile||_{L2}` by composite Simpson quadrature on a uniform, odd-sized grid.
    pub fn l2_norm_simpson(&self) -> Result<f64> {
        let dx = self.uniform_dx()?;
        let squares: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        Ok(simpson(&squares, dx)?.max(0.0).sqrt())
    }
}

/// `n` equally spaced points from the lower to the upper wall (inclusive).
pub fn uniform_grid(geom: &ChannelGeometry, n: usize) -> Result<Vec<f64>> {
    ensure!(n >= 2, Resolution, "a wall-to-wall grid needs at least 2 points, got {n}");
    let dx = geom.h() / (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n).map(|i| geom.x3_lower() + i as f64 * dx).collect();
    grid[n - 1] = geom.x3_upper();
    Ok(grid)
}
