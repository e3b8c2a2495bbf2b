//! Scenario configuration and its JSON representation.
//!
//! The file format is a flat JSON object whose keys are exactly the field
//! names of [`ScenarioConfig`]. Unknown keys are rejected and missing keys
//! fall back to the defaults below.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::geometry::square_diameter;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed configuration: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("override `{0}` is not of the form key=value")]
    Override(String),
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, reason: reason.into() }
}

/// How UAVs are scheduled between clusters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationMode {
    /// Rotate one step along the shortest tour through the clusters.
    Tsp,
    /// Rotate by halving power-of-two offsets over a circulant ordering.
    BinaryJumping,
    /// Baseline: concentric circular orbits.
    Circular,
    /// Baseline: fly to uniformly random points.
    RwpHeuristic,
    /// Ground users only.
    NoUav,
}

impl RotationMode {
    pub const ALL: [RotationMode; 5] = [
        RotationMode::Tsp,
        RotationMode::BinaryJumping,
        RotationMode::Circular,
        RotationMode::RwpHeuristic,
        RotationMode::NoUav,
    ];

    pub fn uses_clustering(self) -> bool {
        matches!(self, RotationMode::Tsp | RotationMode::BinaryJumping)
    }

    pub fn name(self) -> &'static str {
        match self {
            RotationMode::Tsp => "tsp",
            RotationMode::BinaryJumping => "binary_jumping",
            RotationMode::Circular => "circular",
            RotationMode::RwpHeuristic => "rwp_heuristic",
            RotationMode::NoUav => "no_uav",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RwpParams {
    pub v_min: f64,
    pub v_max: f64,
    pub max_pause: f64,
}

impl Default for RwpParams {
    fn default() -> Self {
        Self { v_min: 1.0, v_max: 5.0, max_pause: 1800.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussianParams {
    pub n_clusters: usize,
    pub sigma: f64,
    /// rad/s, counterclockwise.
    pub angular_speed: f64,
    pub center_radius: f64,
}

impl Default for GaussianParams {
    fn default() -> Self {
        Self { n_clusters: 8, sigma: 150.0, angular_speed: 0.0, center_radius: 2500.0 }
    }
}

/// Where ground-user positions come from.
///
/// Serialized as `{"rwp": {...}}`, `{"gaussian_clusters": {...}}` or
/// `{"trace_file": "path"}`; the bare strings `"rwp"` and
/// `"gaussian_clusters"` are accepted as shorthands for default parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", try_from = "SourceRepr")]
pub enum MobilitySource {
    Rwp(RwpParams),
    GaussianClusters(GaussianParams),
    TraceFile(PathBuf),
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum TaggedSource {
    Rwp(RwpParams),
    GaussianClusters(GaussianParams),
    TraceFile(PathBuf),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SourceRepr {
    Name(String),
    Tagged(TaggedSource),
}

impl TryFrom<SourceRepr> for MobilitySource {
    type Error = String;

    fn try_from(repr: SourceRepr) -> Result<Self, String> {
        match repr {
            SourceRepr::Name(name) => match name.as_str() {
                "rwp" => Ok(MobilitySource::Rwp(RwpParams::default())),
                "gaussian_clusters" => Ok(MobilitySource::GaussianClusters(GaussianParams::default())),
                other => Err(format!(
                    "unknown mobility source `{other}` (expected rwp, gaussian_clusters or {{\"trace_file\": path}})"
                )),
            },
            SourceRepr::Tagged(TaggedSource::Rwp(p)) => Ok(MobilitySource::Rwp(p)),
            SourceRepr::Tagged(TaggedSource::GaussianClusters(p)) => Ok(MobilitySource::GaussianClusters(p)),
            SourceRepr::Tagged(TaggedSource::TraceFile(p)) => Ok(MobilitySource::TraceFile(p)),
        }
    }
}

/// All scenario, algorithm and DTN parameters of a run.
///
/// Times are integer seconds. The capacity ratio `n_uavs * uav_capacity /
/// n_users` is derived on demand and never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub area_half_width: f64,
    pub uav_speed: f64,
    pub step: u64,
    pub rotation_interval: u64,
    pub total_time: u64,
    pub n_uavs: usize,
    pub n_users: usize,
    pub uav_capacity: usize,
    pub cell_range: f64,
    pub am_iterations: usize,
    pub ga_iterations: usize,
    pub ga_population: usize,
    pub ga_crossover_prob: f64,
    pub ga_mutation_prob: f64,
    pub dtn_range: f64,
    /// bytes per second
    pub dtn_speed: u64,
    /// bytes
    pub dtn_buffer: u64,
    pub dtn_msg_interval: u64,
    /// bytes
    pub dtn_msg_size: u64,
    pub dtn_ttl: u64,
    pub rotation_mode: RotationMode,
    pub mobility_source: MobilitySource,
    pub idealized_clusters: bool,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            area_half_width: 4000.0,
            uav_speed: 20.0,
            step: 10,
            rotation_interval: 60,
            total_time: 43_200,
            n_uavs: 10,
            n_users: 100,
            uav_capacity: 13,
            cell_range: 1000.0,
            am_iterations: 4,
            ga_iterations: 100,
            ga_population: 100,
            ga_crossover_prob: 0.8,
            ga_mutation_prob: 0.4,
            dtn_range: 100.0,
            dtn_speed: 6570 * 1024,
            dtn_buffer: 20 * 1024 * 1024,
            dtn_msg_interval: 10,
            dtn_msg_size: 25 * 1024,
            dtn_ttl: 18_000,
            rotation_mode: RotationMode::BinaryJumping,
            mobility_source: MobilitySource::Rwp(RwpParams::default()),
            idealized_clusters: false,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    /// Parse a JSON object, apply `key=value` overrides, then validate.
    ///
    /// Override values are read as JSON when they parse as such and as plain
    /// strings otherwise, so `rotation_mode=tsp` and `n_uavs=8` both work.
    pub fn from_json_with_overrides(json: Option<&str>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut obj: Map<String, Value> = match json {
            Some(text) => serde_json::from_str(text)?,
            None => Map::new(),
        };
        for ov in overrides {
            let (key, raw) = ov.split_once('=').ok_or_else(|| ConfigError::Override(ov.clone()))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Override(ov.clone()));
            }
            let value = serde_json::from_str::<Value>(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            obj.insert(key.to_string(), value);
        }
        let config: ScenarioConfig = serde_json::from_value(Value::Object(obj))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_json(json: &str) -> Result<Self, ConfigError> {
        Self::from_json_with_overrides(Some(json), &[])
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |field: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(field, format!("must be finite and > 0, got {v}")))
            }
        };
        let prob = |field: &'static str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(invalid(field, format!("must lie in [0, 1], got {p}")))
            }
        };
        positive("area_half_width", self.area_half_width)?;
        positive("uav_speed", self.uav_speed)?;
        positive("cell_range", self.cell_range)?;
        positive("dtn_range", self.dtn_range)?;
        prob("ga_crossover_prob", self.ga_crossover_prob)?;
        prob("ga_mutation_prob", self.ga_mutation_prob)?;
        let nonzero = [
            ("step", self.step),
            ("rotation_interval", self.rotation_interval),
            ("total_time", self.total_time),
            ("n_uavs", self.n_uavs as u64),
            ("n_users", self.n_users as u64),
            ("uav_capacity", self.uav_capacity as u64),
            ("am_iterations", self.am_iterations as u64),
            ("ga_iterations", self.ga_iterations as u64),
            ("ga_population", self.ga_population as u64),
            ("dtn_speed", self.dtn_speed),
            ("dtn_buffer", self.dtn_buffer),
            ("dtn_msg_interval", self.dtn_msg_interval),
            ("dtn_msg_size", self.dtn_msg_size),
            ("dtn_ttl", self.dtn_ttl),
        ];
        for (field, v) in nonzero {
            if v == 0 {
                return Err(invalid(field, "must be strictly positive"));
            }
        }
        if self.rotation_interval % self.step != 0 {
            return Err(invalid("rotation_interval", format!("must be a multiple of step ({} s)", self.step)));
        }
        if self.total_time % self.step != 0 {
            return Err(invalid("total_time", format!("must be a multiple of step ({} s)", self.step)));
        }
        if self.ga_population % 2 != 0 {
            return Err(invalid("ga_population", "must be even"));
        }
        if self.n_users < 2 {
            return Err(invalid("n_users", "DTN traffic needs at least two ground users"));
        }
        if self.rotation_mode.uses_clustering() && self.n_uavs > self.n_users {
            return Err(invalid("n_uavs", "clustering needs at least as many users as UAVs"));
        }
        match &self.mobility_source {
            MobilitySource::Rwp(p) => {
                positive("mobility_source.v_min", p.v_min)?;
                positive("mobility_source.v_max", p.v_max)?;
                if p.v_max < p.v_min {
                    return Err(invalid("mobility_source", "v_max must be >= v_min"));
                }
                if !(p.max_pause.is_finite() && p.max_pause >= 0.0) {
                    return Err(invalid("mobility_source", "max_pause must be >= 0"));
                }
            }
            MobilitySource::GaussianClusters(p) => {
                if p.n_clusters == 0 {
                    return Err(invalid("mobility_source", "n_clusters must be >= 1"));
                }
                if !(p.sigma >= 0.0 && p.center_radius >= 0.0 && p.angular_speed.is_finite()) {
                    return Err(invalid("mobility_source", "sigma and center_radius must be >= 0"));
                }
            }
            MobilitySource::TraceFile(_) => {}
        }
        Ok(())
    }

    /// Total UAV capacity over user count.
    pub fn capacity_ratio(&self) -> f64 {
        (self.n_uavs * self.uav_capacity) as f64 / self.n_users as f64
    }

    pub fn epochs(&self) -> u64 {
        self.total_time / self.step
    }

    pub fn area_diameter(&self) -> f64 {
        square_diameter(self.area_half_width)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_table() {
        let c = ScenarioConfig::default();
        assert_eq!(c.rotation_interval, 6 * c.step);
        assert_eq!(c.total_time, 12 * 3600);
        assert!((c.capacity_ratio() - 1.3).abs() < 1e-12);
        assert_eq!(c.dtn_ttl, 300 * 60);
        assert_eq!(c.dtn_buffer / c.dtn_msg_size, 819);
        c.validate().unwrap();
    }

    #[test]
    fn missing_keys_take_defaults() {
        let c = ScenarioConfig::from_json(r#"{"n_uavs": 8, "rotation_mode": "tsp"}"#).unwrap();
        assert_eq!(c.n_uavs, 8);
        assert_eq!(c.rotation_mode, RotationMode::Tsp);
        assert_eq!(c.n_users, 100);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(matches!(ScenarioConfig::from_json(r#"{"n_uav": 8}"#), Err(ConfigError::Parse(_))));
        assert!(ScenarioConfig::from_json_with_overrides(None, &["bogus=1".into()]).is_err());
    }

    #[test]
    fn overrides_are_validated() {
        let c = ScenarioConfig::from_json_with_overrides(
            Some(r#"{"seed": 3}"#),
            &["seed=9".into(), "rotation_mode=circular".into(), "mobility_source=gaussian_clusters".into()],
        )
        .unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.rotation_mode, RotationMode::Circular);
        assert_eq!(c.mobility_source, MobilitySource::GaussianClusters(GaussianParams::default()));

        let err = ScenarioConfig::from_json_with_overrides(None, &["rotation_interval=65".into()]).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { field: "rotation_interval", .. }));
        assert!(ScenarioConfig::from_json_with_overrides(None, &["ga_population=7".into()]).is_err());
        assert!(ScenarioConfig::from_json_with_overrides(None, &["ga_mutation_prob=1.5".into()]).is_err());
        assert!(ScenarioConfig::from_json_with_overrides(None, &["novalue".into()]).is_err());
    }

    #[test]
    fn mobility_source_forms() {
        let c = ScenarioConfig::from_json(r#"{"mobility_source": {"trace_file": "a/b.movements"}}"#).unwrap();
        assert_eq!(c.mobility_source, MobilitySource::TraceFile("a/b.movements".into()));
        let c = ScenarioConfig::from_json(r#"{"mobility_source": {"rwp": {"max_pause": 60}}}"#).unwrap();
        assert_eq!(c.mobility_source, MobilitySource::Rwp(RwpParams { max_pause: 60.0, ..Default::default() }));
        assert!(ScenarioConfig::from_json(r#"{"mobility_source": "slaw"}"#).is_err());
    }

    #[test]
    fn print_round_trip() {
        let mut c = ScenarioConfig::default();
        c.mobility_source = MobilitySource::GaussianClusters(GaussianParams { sigma: 0.0, ..Default::default() });
        c.idealized_clusters = true;
        let back = ScenarioConfig::from_json(&c.to_json_pretty()).unwrap();
        assert_eq!(back, c);
    }
}
