//! JSON scenario configuration.

use std::path::Path;

use preq_core::integrator::{IntegratorConfig, Method};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    #[default]
    Sphere,
    Plane,
}

/// One preq: an equilibrium, where to put it, and how to perturb it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreqSpec {
    pub n: usize,
    pub alpha: f64,
    /// Central strength; negative values give anti-preqs.
    pub gamma: f64,
    /// Sphere: rotation vector carrying the north pole to the preq.
    /// Plane: `[θ, a_x, a_y]` acting by `z ↦ e^{iθ} z + a`.
    #[serde(default)]
    pub placement: [f64; 3],
    /// Momentum perturbation in the canonical frame (sphere only).
    #[serde(default)]
    pub dmu: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    #[default]
    Strang,
    LieTrotter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    /// Fixed time step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Step as a fraction of the fastest equilibrium rotation period,
    /// `dt = step_fraction / max |ξ|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_fraction: Option<f64>,
    #[serde(default)]
    pub method: MethodKind,
    #[serde(default = "one_usize")]
    pub record_every: usize,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self {
            dt: None,
            step_fraction: Some(1e-3),
            method: MethodKind::Strang,
            record_every: 1,
        }
    }
}

impl IntegratorSpec {
    pub fn to_config(&self, fastest_rate: f64) -> AppResult<IntegratorConfig> {
        let dt = match (self.dt, self.step_fraction) {
            (Some(dt), None) => dt,
            (None, Some(f)) if fastest_rate > 0.0 => f / fastest_rate,
            (None, Some(_)) => return Err(AppError::Config("step_fraction needs a rotating equilibrium".into())),
            _ => return Err(AppError::Config("give exactly one of dt and step_fraction".into())),
        };
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(AppError::Config(format!("time step must be positive, got {dt}")));
        }
        if self.record_every == 0 {
            return Err(AppError::Config("record_every must be at least 1".into()));
        }
        let method = match self.method {
            MethodKind::Strang => Method::Strang,
            MethodKind::LieTrotter => Method::LieTrotter,
        };
        Ok(IntegratorConfig::new(dt)
            .with_method(method)
            .with_record_every(self.record_every))
    }
}

/// File names inside the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputPaths {
    pub trajectory: String,
    pub summary: String,
    pub report: String,
}

impl Default for OutputPaths {
    fn default() -> Self {
        Self {
            trajectory: "trajectory.csv".into(),
            summary: "summary.json".into(),
            report: "conservation.txt".into(),
        }
    }
}

/// Thresholds of the interaction classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifierConfig {
    /// Allowed relative deviation of a surviving preq's pair distances.
    pub shape_tolerance: f64,
    /// A dipole has net strength below this fraction of `|Γ|`.
    pub dipole_strength: f64,
    /// Single-linkage clustering radius, in preq diameters.
    pub linkage: f64,
    /// Fraction of the run at the end over which a dipole must persist.
    pub persistence: f64,
    /// Margin, in diameters, separating attraction or repulsion from
    /// free flight.
    pub force_margin: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            shape_tolerance: 0.2,
            dipole_strength: 0.05,
            linkage: 1.0,
            persistence: 0.1,
            force_margin: 0.05,
        }
    }
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn default_min_separation() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub domain: DomainKind,
    #[serde(default = "one")]
    pub radius: f64,
    pub preqs: Vec<PreqSpec>,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    pub duration: f64,
    #[serde(default)]
    pub output: OutputPaths,
    /// Seed of the random placement offsets.
    #[serde(default)]
    pub seed: u64,
    /// Size of the random placement offsets (rotation angle on the sphere,
    /// translation on the plane). Zero disables them.
    #[serde(default)]
    pub jitter: f64,
    /// Skips the initial separation check.
    #[serde(default)]
    pub allow_close: bool,
    #[serde(default = "default_min_separation")]
    pub min_separation: f64,
    #[serde(default)]
    pub classifier: ClassifierConfig,
}

/// Preqs must start at least this many diameters apart.
pub const MIN_INITIAL_SEPARATION: f64 = 5.0;

impl ScenarioConfig {
    pub fn from_json(text: &str) -> AppResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| AppError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    /// Checks everything that does not require building the equilibria.
    pub fn validate(&self) -> AppResult<()> {
        let bad = |m: String| Err(AppError::Config(m));
        if self.preqs.is_empty() {
            return bad("at least one preq is required".into());
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad(format!("radius must be positive, got {}", self.radius));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return bad(format!("duration must be non-negative, got {}", self.duration));
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return bad("jitter must be non-negative".into());
        }
        if !(self.min_separation >= 0.0) {
            return bad("min_separation must be non-negative".into());
        }
        for (i, p) in self.preqs.iter().enumerate() {
            if p.n < 2 {
                return bad(format!("preq {i}: n must be at least 2"));
            }
            if self.domain == DomainKind::Plane && p.dmu != [0.0; 3] {
                return bad(format!("preq {i}: momentum perturbations are only defined on the sphere"));
            }
            if p.placement.iter().chain(&p.dmu).any(|v| !v.is_finite()) {
                return bad(format!("preq {i}: non-finite placement or perturbation"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "preqs": [{"n": 4, "alpha": 0.5, "gamma": 1.0}],
        "duration": 1.0
    }"#;

    #[test]
    fn defaults_fill_in() {
        let c = ScenarioConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.domain, DomainKind::Sphere);
        assert_eq!(c.radius, 1.0);
        assert_eq!(c.integrator.step_fraction, Some(1e-3));
        assert_eq!(c.output.trajectory, "trajectory.csv");
        assert_eq!(c.classifier.shape_tolerance, 0.2);
        assert_eq!(c.classifier.dipole_strength, 0.05);
        let again = ScenarioConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ScenarioConfig::from_json("{").is_err());
        let unknown = MINIMAL.replace("\"duration\"", "\"durtion\"");
        assert!(matches!(ScenarioConfig::from_json(&unknown), Err(AppError::Config(_))));
        let plane = MINIMAL.replace("\"preqs\"", "\"domain\": \"plane\", \"preqs\"").replace(
            "\"gamma\": 1.0",
            "\"gamma\": 1.0, \"dmu\": [0.1, 0, 0]",
        );
        assert!(ScenarioConfig::from_json(&plane).is_err());
        let empty = r#"{"preqs": [], "duration": 1.0}"#;
        assert!(ScenarioConfig::from_json(empty).is_err());
    }

    #[test]
    fn integrator_step_choice() {
        let mut s = IntegratorSpec::default();
        assert_eq!(s.to_config(10.0).unwrap().dt, 1e-4);
        s.dt = Some(0.5);
        assert!(s.to_config(10.0).is_err());
        s.step_fraction = None;
        assert_eq!(s.to_config(10.0).unwrap().dt, 0.5);
        s.record_every = 0;
        assert!(s.to_config(10.0).is_err());
    }
}
