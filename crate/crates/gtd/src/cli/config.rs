//! Run configuration for the command-line front end: JSON in, validated
//! builders out. Every section rejects unknown keys so a typo fails loudly
//! instead of being silently ignored.

use crate::error::{GtdError, Result};
use crate::phasespace::{LambdaField, PhaseMetricSpec};
use crate::systems::{
    catalog_gen_ideal, catalog_gen_ideal_energy, catalog_ideal_gas, catalog_ideal_gas_energy,
    catalog_power_log, catalog_separable, catalog_vdw, FundamentalEquation, Part1D,
    PowerLogKind, Representation,
};
use serde::de::{Error as DeError, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;

/// Complete input for one `gtd` invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Which fundamental equation to use.
    pub system: SystemConfig,
    /// Metric family parameters.
    pub metric: MetricConfig,
    /// Scan grid for the pointwise commands.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    /// Process description for the geodesic command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geodesic: Option<GeodesicConfig>,
    /// Sampling controls for the invariance check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub legendre: Option<LegendreConfig>,
    /// Numerical tolerances.
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Where and how to write the table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

impl RunConfig {
    /// Parse from JSON text.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| GtdError::Config(format!("bad run config: {e}")))
    }

    /// Serialize to pretty JSON; parsing the result reproduces the config.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run config serializes")
    }
}

/// System selection as a flat map: a `system` name plus numeric parameters,
/// for instance `{"system": "vdw", "kappa": 1.0, "a": 0.1, "b": 0.05}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    /// Catalog name.
    pub name: String,
    /// Numeric parameters keyed by name.
    pub params: BTreeMap<String, f64>,
}

impl Serialize for SystemConfig {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(1 + self.params.len()))?;
        map.serialize_entry("system", &self.name)?;
        for (k, v) in &self.params {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for SystemConfig {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = SystemConfig;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a map with a \"system\" name and numeric parameters")
            }
            fn visit_map<A: MapAccess<'de>>(
                self,
                mut access: A,
            ) -> std::result::Result<SystemConfig, A::Error> {
                let mut name: Option<String> = None;
                let mut params = BTreeMap::new();
                while let Some(key) = access.next_key::<String>()? {
                    if key == "system" {
                        if name.is_some() {
                            return Err(A::Error::duplicate_field("system"));
                        }
                        name = Some(access.next_value()?);
                    } else {
                        let value: f64 = access.next_value()?;
                        if params.insert(key.clone(), value).is_some() {
                            return Err(A::Error::custom(format!("duplicate parameter {key}")));
                        }
                    }
                }
                Ok(SystemConfig {
                    name: name.ok_or_else(|| A::Error::missing_field("system"))?,
                    params,
                })
            }
        }
        deserializer.deserialize_map(V)
    }
}

/// Pull one required parameter out of the map.
fn take(params: &mut BTreeMap<String, f64>, key: &str, system: &str) -> Result<f64> {
    params
        .remove(key)
        .ok_or_else(|| GtdError::Config(format!("system {system:?} needs parameter {key:?}")))
}

fn reject_leftovers(params: &BTreeMap<String, f64>, system: &str) -> Result<()> {
    if let Some(key) = params.keys().next() {
        return Err(GtdError::Config(format!(
            "unexpected parameter {key:?} for system {system:?}"
        )));
    }
    Ok(())
}

impl SystemConfig {
    /// Shorthand constructor used by tests and examples.
    pub fn new(name: &str, params: &[(&str, f64)]) -> Self {
        SystemConfig {
            name: name.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    /// Resolve to a catalog equation.
    ///
    /// # Errors
    /// `Config` on an unknown name, a missing parameter, or an extra one.
    pub fn build(&self) -> Result<FundamentalEquation> {
        let mut p = self.params.clone();
        let name = self.name.as_str();
        let eq = match name {
            "ideal-gas" => {
                let kappa = take(&mut p, "kappa", name)?;
                reject_leftovers(&p, name)?;
                catalog_ideal_gas(kappa)?
            }
            "ideal-gas-energy" => {
                let kappa = take(&mut p, "kappa", name)?;
                reject_leftovers(&p, name)?;
                catalog_ideal_gas_energy(kappa)?
            }
            "vdw" => {
                let kappa = take(&mut p, "kappa", name)?;
                let a = take(&mut p, "a", name)?;
                let b = take(&mut p, "b", name)?;
                reject_leftovers(&p, name)?;
                catalog_vdw(kappa, a, b)?
            }
            "gen-ideal" => {
                let kappa = take(&mut p, "kappa", name)?;
                let c = take(&mut p, "c", name)?;
                reject_leftovers(&p, name)?;
                catalog_gen_ideal(kappa, c)?
            }
            "gen-ideal-energy" => {
                let kappa = take(&mut p, "kappa", name)?;
                let c = take(&mut p, "c", name)?;
                reject_leftovers(&p, name)?;
                catalog_gen_ideal_energy(kappa, c)?
            }
            "power" => {
                let s0 = take(&mut p, "s0", name)?;
                let alpha = take(&mut p, "alpha", name)?;
                let beta = take(&mut p, "beta", name)?;
                reject_leftovers(&p, name)?;
                catalog_power_log(PowerLogKind::Power, s0, alpha, beta, 0.0)?
            }
            "log" => {
                let s0 = take(&mut p, "s0", name)?;
                let alpha = take(&mut p, "alpha", name)?;
                let beta = take(&mut p, "beta", name)?;
                let c = take(&mut p, "c", name)?;
                reject_leftovers(&p, name)?;
                catalog_power_log(PowerLogKind::Log, s0, alpha, beta, c)?
            }
            "separable-log" => {
                // Parameters w1..wm are log weights for coordinates E1..Em.
                let mut weights: Vec<(usize, f64)> = Vec::new();
                for (key, value) in &p {
                    let idx: usize = key
                        .strip_prefix('w')
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| {
                            GtdError::Config(format!(
                                "unexpected parameter {key:?} for system {name:?}; use w1..wm"
                            ))
                        })?;
                    if idx == 0 {
                        return Err(GtdError::Config("weights are numbered from w1".into()));
                    }
                    weights.push((idx, *value));
                }
                weights.sort_unstable_by_key(|(i, _)| *i);
                if weights.is_empty() {
                    return Err(GtdError::Config("separable-log needs at least w1".into()));
                }
                for (slot, (idx, _)) in weights.iter().enumerate() {
                    if *idx != slot + 1 {
                        return Err(GtdError::Config(format!(
                            "weights must be contiguous starting at w1, missing w{}",
                            slot + 1
                        )));
                    }
                }
                let parts: Vec<Part1D> = weights
                    .iter()
                    .map(|(i, w)| Part1D::log_term(format!("E{i}"), *w))
                    .collect();
                catalog_separable(parts)?
            }
            other => {
                return Err(GtdError::Config(format!("unknown system {other:?}")));
            }
        };
        Ok(eq)
    }
}

/// Metric family parameters, for instance
/// `{"k": -1, "Lambda": "const:-1", "representation": "entropy"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    /// Integer family parameter.
    pub k: i32,
    /// Conformal factor, currently `"const:<value>"`.
    #[serde(rename = "Lambda")]
    pub lambda: String,
    /// Coordinate representation the metric lives in.
    pub representation: Representation,
}

impl MetricConfig {
    /// Resolve to a metric spec.
    pub fn build(&self) -> Result<PhaseMetricSpec> {
        let lambda = LambdaField::parse(&self.lambda)?;
        Ok(PhaseMetricSpec { k: self.k, lambda, representation: self.representation })
    }
}

/// Rectangular scan grid with inclusive endpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Per-axis [low, high].
    pub ranges: Vec<[f64; 2]>,
    /// Per-axis point counts.
    pub counts: Vec<usize>,
}

impl GridConfig {
    /// Validate against the chart dimension.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.ranges.len() != n || self.counts.len() != n {
            return Err(GtdError::Config(format!(
                "grid must describe {n} axes, got {} ranges and {} counts",
                self.ranges.len(),
                self.counts.len()
            )));
        }
        for (axis, ([lo, hi], m)) in self.ranges.iter().zip(&self.counts).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(GtdError::Config(format!("grid axis {axis} has non-finite bounds")));
            }
            if *m == 0 {
                return Err(GtdError::Config(format!("grid axis {axis} has zero points")));
            }
            if *m > 1 && lo >= hi {
                return Err(GtdError::Config(format!(
                    "grid axis {axis} needs low < high for multiple points"
                )));
            }
        }
        Ok(())
    }

    /// All scan points in row-major order: the first axis varies slowest.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let n = self.ranges.len();
        let coord = |axis: usize, i: usize| -> f64 {
            let [lo, hi] = self.ranges[axis];
            let m = self.counts[axis];
            if m == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (m - 1) as f64
            }
        };
        let total: usize = self.counts.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; n];
        loop {
            out.push((0..n).map(|a| coord(a, idx[a])).collect());
            let mut axis = n;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < self.counts[axis] {
                    break;
                }
                idx[axis] = 0;
                if axis == 0 {
                    return out;
                }
            }
        }
    }
}

fn default_tau_max() -> f64 {
    1.0
}

fn default_step() -> f64 {
    1e-3
}

/// Initial data or endpoints for the geodesic command; exactly one of
/// `velocity` and `end` must be present.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicConfig {
    /// Starting state.
    pub start: Vec<f64>,
    /// Initial coordinate velocity (initial-value mode).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<Vec<f64>>,
    /// Target state (boundary-value mode, parameter normalized to [0, 1]).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<Vec<f64>>,
    /// Parameter span for initial-value runs.
    #[serde(default = "default_tau_max")]
    pub tau_max: f64,
    /// Requested integration step; snapped to divide the span evenly.
    #[serde(default = "default_step")]
    pub step: f64,
}

impl GeodesicConfig {
    /// Validate against the chart dimension.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.start.len() != n {
            return Err(GtdError::Config(format!("geodesic start must have {n} coordinates")));
        }
        match (&self.velocity, &self.end) {
            (Some(v), None) => {
                if v.len() != n {
                    return Err(GtdError::Config(format!(
                        "geodesic velocity must have {n} components"
                    )));
                }
            }
            (None, Some(e)) => {
                if e.len() != n {
                    return Err(GtdError::Config(format!("geodesic end must have {n} coordinates")));
                }
                if self.tau_max != 1.0 {
                    return Err(GtdError::Config(
                        "boundary-value runs normalize the parameter to [0, 1]; leave tau_max at 1"
                            .into(),
                    ));
                }
            }
            (Some(_), Some(_)) => {
                return Err(GtdError::Config(
                    "give either a velocity or an end state, not both".into(),
                ));
            }
            (None, None) => {
                return Err(GtdError::Config("give either a velocity or an end state".into()));
            }
        }
        Ok(())
    }
}

fn default_seed() -> u64 {
    7
}

fn default_samples() -> usize {
    100
}

/// Sampling controls for the invariance check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegendreConfig {
    /// Seed for the deterministic point sampler.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Number of phase points per index subset.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

impl Default for LegendreConfig {
    fn default() -> Self {
        LegendreConfig { seed: default_seed(), samples: default_samples() }
    }
}

fn default_ng_tol() -> f64 {
    1e-6
}

fn default_shoot_tol() -> f64 {
    1e-8
}

fn default_fd_step_scale() -> f64 {
    1.0
}

/// Numerical tolerances with sensible defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Threshold on the extremality residual for the informational verdict.
    pub ng: f64,
    /// Endpoint tolerance for boundary-value geodesics.
    pub shoot: f64,
    /// Multiplier on the curvature differentiation step.
    pub fd_step_scale: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ng: default_ng_tol(),
            shoot: default_shoot_tol(),
            fd_step_scale: default_fd_step_scale(),
        }
    }
}

/// Table formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    /// Comma-separated values with a header row.
    Csv,
    /// Pretty-printed JSON.
    Json,
}

/// Output destination and format; omitted fields fall back to stdout and the
/// command's native format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// File to write the table to; stdout when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Table format; each command has a native default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}
