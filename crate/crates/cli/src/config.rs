//! Run configuration: one JSON document, defaults for every key, dotted-path
//! overrides, and re-validation through the library constructors.

use std::path::{Path, PathBuf};

use alpha_channel::averaging::{PressureHistory, PressureSignal};
use alpha_channel::channel_model::{ChannelGeometry, FluidParams};
use alpha_channel::kernel::KernelConfig;
use alpha_channel::roughness::RoughnessSpec;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub fluid: FluidConfig,
    pub pressure: PressureConfig,
    pub kernel: KernelSection,
    pub roughness: RoughnessConfig,
    pub output: OutputConfig,
    pub tolerance: ToleranceConfig,
    pub runs: RunsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub h: f64,
    pub pi1: f64,
    pub pi2: f64,
    pub x3_lower: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self { h: 1.0, pi1: 1.0, pi2: 1.0, x3_lower: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluidConfig {
    pub nu: f64,
    pub alpha: f64,
}

impl Default for FluidConfig {
    fn default() -> Self {
        Self { nu: 1.0, alpha: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalConfig {
    Constant { p10: f64 },
    Sinusoid { mean: f64, amplitude: f64, omega: f64, #[serde(default)] phase: f64 },
    Sampled { t0: f64, dt: f64, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PressureConfig {
    pub signal: SignalConfig,
    pub p_bar: f64,
}

impl Default for PressureConfig {
    fn default() -> Self {
        Self { signal: SignalConfig::Constant { p10: -1.0 }, p_bar: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    pub k_max: usize,
    pub tail_tol: f64,
    /// Defaults to `1e-6 h^2 / nu`.
    pub t_floor: Option<f64>,
    pub profile_modes: usize,
}

impl Default for KernelSection {
    fn default() -> Self {
        Self {
            k_max: KernelConfig::DEFAULT_K_MAX,
            tail_tol: KernelConfig::DEFAULT_TAIL_TOL,
            t_floor: None,
            profile_modes: KernelConfig::DEFAULT_PROFILE_MODES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoughnessConfig {
    pub c1: f64,
    pub h1: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub r1_0: f64,
    pub r2_0: f64,
    pub n1: u32,
    pub n2: u32,
    /// Defaults to `4 k + 1` with `k` the highest profile mode.
    pub n_max: Option<usize>,
}

impl Default for RoughnessConfig {
    fn default() -> Self {
        Self {
            c1: 1e-3,
            h1: 1e-3,
            delta1: 0.1,
            delta2: 0.1,
            r1_0: 0.05,
            r2_0: 0.05,
            n1: 2,
            n2: 2,
            n_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Significant digits in CSV output.
    pub precision: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), precision: 17 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    /// Relative gap between the series and closed-form kernel time integrals.
    pub kernel_integral: f64,
    /// Termwise heat-equation residual of the kernel.
    pub heat_residual: f64,
    /// Gap between the Duhamel profile and the time-stepping oracle.
    pub evolve: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self { kernel_integral: 1e-8, heat_residual: 1e-12, evolve: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunsConfig {
    pub kernel: KernelRun,
    pub evolve: EvolveRun,
    pub poiseuille: PoiseuilleRun,
    pub bound: BoundRun,
    pub roughness: RoughnessRun,
    pub alpha: AlphaRun,
    pub profiles: ProfilesRun,
    pub verify: VerifyRun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelRun {
    /// Points of the uniform `x` grid on `[0, h]`.
    pub x_points: usize,
    pub times: Vec<f64>,
}

impl Default for KernelRun {
    fn default() -> Self {
        Self { x_points: 11, times: vec![0.001, 0.01, 0.1, 1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveRun {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub snapshots: usize,
    pub grid_points: usize,
    /// Time the oracle runs from rest before `t_start`; defaults to
    /// `ln(1e8) h^2 / (nu pi^2)`.
    pub burn_in: Option<f64>,
}

impl Default for EvolveRun {
    fn default() -> Self {
        Self { t_start: 0.0, t_end: 1.0, dt: 2.5e-4, snapshots: 4, grid_points: 33, burn_in: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoiseuilleRun {
    pub t: f64,
    pub grid_points: usize,
}

impl Default for PoiseuilleRun {
    fn default() -> Self {
        Self { t: 0.0, grid_points: 33 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundRun {
    pub window: f64,
    pub grid_points: usize,
}

impl Default for BoundRun {
    fn default() -> Self {
        Self { window: 1.0, grid_points: 257 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoughnessRun {
    /// Modes to sweep; empty means every odd `k <= k_max`.
    pub k_values: Vec<usize>,
    pub k_max: usize,
}

impl Default for RoughnessRun {
    fn default() -> Self {
        Self { k_values: Vec::new(), k_max: 99 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlphaRun {
    pub t: f64,
    pub grid_points: usize,
}

impl Default for AlphaRun {
    fn default() -> Self {
        Self { t: 0.0, grid_points: 33 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfilesRun {
    pub grid_points: usize,
    pub b: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Default for ProfilesRun {
    fn default() -> Self {
        Self { grid_points: 257, b: 1.0, a1: 1.0, a2: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyRun {
    pub seed: u64,
}

impl Default for VerifyRun {
    fn default() -> Self {
        Self { seed: 20_240_101 }
    }
}

/// Validated library objects built from a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Model {
    pub config: RunConfig,
    pub geometry: ChannelGeometry,
    pub fluid: FluidParams,
    pub pressure: PressureHistory,
    pub kernel: KernelConfig,
    pub roughness: RoughnessSpec,
    pub hash: String,
}

impl Model {
    pub fn nu(&self) -> f64 {
        self.fluid.nu()
    }
}

fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            // a differently tagged variant replaces the default wholesale
            let retagged = matches!((b.get("type"), o.get("type")), (Some(x), Some(y)) if x != y);
            if retagged {
                *b = o;
                return;
            }
            for (key, value) in o {
                match b.get_mut(&key) {
                    Some(slot) => merge(slot, value),
                    None => {
                        b.insert(key, value);
                    }
                }
            }
        }
        (slot, value) => *slot = value,
    }
}

/// Applies `a.b.c=value`; the value is parsed as JSON, falling back to a string.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Validation(format!("override `{assignment}` is not of the form key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Validation(format!("override path `{path}` has an empty segment")));
    }
    let mut patch = value;
    for key in keys.iter().rev() {
        let mut map = Map::new();
        map.insert((*key).to_string(), patch);
        patch = Value::Object(map);
    }
    merge(doc, patch);
    Ok(())
}

/// Reads the optional config file, applies overrides and validates everything.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Model, CliError> {
    let mut doc = serde_json::to_value(RunConfig::default()).expect("defaults serialize");
    if let Some(path) = path {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        let file: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("config {} is not valid JSON: {e}", path.display())))?;
        if !file.is_object() {
            return Err(CliError::Validation("config must be a JSON object".into()));
        }
        merge(&mut doc, file);
    }
    for assignment in overrides {
        apply_override(&mut doc, assignment)?;
    }
    let config: RunConfig =
        serde_json::from_value(doc).map_err(|e| CliError::Validation(format!("invalid config: {e}")))?;
    build(config)
}

/// Builds the library objects, re-validating every invariant.
pub fn build(config: RunConfig) -> Result<Model, CliError> {
    let g = &config.geometry;
    let geometry = ChannelGeometry::with_walls(g.x3_lower, g.x3_lower + g.h, g.pi1, g.pi2)?;
    let fluid = FluidParams::new(config.fluid.nu, config.fluid.alpha)?;
    let signal = match &config.pressure.signal {
        SignalConfig::Constant { p10 } => PressureSignal::Constant { p10: *p10 },
        SignalConfig::Sinusoid { mean, amplitude, omega, phase } => {
            PressureSignal::Sinusoid { mean: *mean, amplitude: *amplitude, omega: *omega, phase: *phase }
        }
        SignalConfig::Sampled { t0, dt, values } => PressureSignal::Sampled { t0: *t0, dt: *dt, values: values.clone() },
    };
    let pressure = PressureHistory::new(signal, config.pressure.p_bar)?;
    let k = &config.kernel;
    let t_floor = k.t_floor.unwrap_or(1e-6 * geometry.h() * geometry.h() / fluid.nu());
    let kernel = KernelConfig::new(k.k_max, k.tail_tol, t_floor, k.profile_modes)?;
    let r = &config.roughness;
    let n_max = r.n_max.unwrap_or(RoughnessSpec::default_n_max(kernel.profile_k_max()));
    let roughness =
        RoughnessSpec::new(geometry, r.c1, r.h1, r.delta1, r.delta2, r.r1_0, r.r2_0, r.n1, r.n2, n_max)?;
    let precision = config.output.precision;
    if !(1..=17).contains(&precision) {
        return Err(CliError::Validation(format!("output.precision must be in 1..=17, got {precision}")));
    }
    let t = &config.tolerance;
    for (name, v) in [("kernel_integral", t.kernel_integral), ("heat_residual", t.heat_residual), ("evolve", t.evolve)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Validation(format!("tolerance.{name} must be positive, got {v}")));
        }
    }
    let canonical = serde_json::to_string(&config).expect("config serializes");
    let hash = format!("{:x}", Sha256::digest(canonical.as_bytes()));
    Ok(Model { config, geometry, fluid, pressure, kernel, roughness, hash })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let m = load(None, &[]).unwrap();
        assert_eq!(m.geometry.h(), 1.0);
        assert_eq!(m.roughness.n_max(), 4 * 509 + 1);
        assert_eq!(m.hash.len(), 64);
    }

    #[test]
    fn overrides_parse_json_and_nest() {
        let m = load(None, &["kernel.tail_tol=1e-12".into(), "output.directory=results".into()]).unwrap();
        assert_eq!(m.kernel.tail_tol(), 1e-12);
        assert_eq!(m.config.output.directory, PathBuf::from("results"));
        let s = load(
            None,
            &[r#"pressure.signal={"type":"sinusoid","mean":-1,"amplitude":0.5,"omega":6.28}"#.into(), "pressure.p_bar=2".into()],
        )
        .unwrap();
        assert!(matches!(s.config.pressure.signal, SignalConfig::Sinusoid { .. }));
    }

    #[test]
    fn unknown_keys_and_invalid_values_are_rejected() {
        assert!(matches!(load(None, &["geometry.width=2".into()]), Err(CliError::Validation(_))));
        assert!(matches!(load(None, &["roughness.h1=0.5".into()]), Err(CliError::Validation(_))));
        assert!(matches!(load(None, &["pressure.p_bar=0.5".into()]), Err(CliError::Validation(_))));
        assert!(matches!(load(None, &["nonsense".into()]), Err(CliError::Validation(_))));
    }

    #[test]
    fn hash_tracks_the_effective_config() {
        let a = load(None, &[]).unwrap();
        let b = load(None, &["fluid.nu=1.0".into()]).unwrap();
        let c = load(None, &["fluid.nu=2.0".into()]).unwrap();
        assert_eq!(a.hash, b.hash);
        assert_ne!(a.hash, c.hash);
    }
}
