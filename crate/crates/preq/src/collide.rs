//! Two-preq collision set-ups on the sphere.
//!
//! Preq A starts on the equator west of the collision point `R x̂` and
//! moves east. Preq B moves west along the equator tilted about `ŷ` by
//! `impact / R`, so the undisturbed paths pass `impact` apart near `R x̂`.
//! The momentum perturbation of each preq is chosen so its predicted drift
//! has the requested speed.

use nalgebra::Rotation3;
use preq_core::drift::{build_perturbation, drift_form_sphere, SMALLNESS_BOUND};
use preq_core::math::rotation_matrix;
use preq_core::releq::build_sphere_releq;
use preq_core::{Mat3, Vec3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{Classification, ForceSense};
use crate::config::{IntegratorSpec, OutputPaths, PreqSpec, ScenarioConfig};
use crate::error::{AppError, AppResult};
use crate::scenario::simulate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollisionKind {
    /// Two identical preqs.
    LikePair,
    /// A preq and its anti-preq.
    AntiPair,
}

/// Full description of a two-preq collision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionSetup {
    pub kind: CollisionKind,
    pub n: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub radius: f64,
    /// Offset of the undisturbed paths at closest approach (geodesic).
    pub impact: f64,
    /// Rate at which the undisturbed preqs close in.
    pub closing_speed: f64,
    /// Keep preq B at rest; A then carries the whole closing speed.
    pub target_at_rest: bool,
    /// Initial distance between the preqs, in diameters.
    pub start_separation: f64,
    /// Run length as a multiple of the undisturbed time to meet.
    pub run_factor: f64,
    /// `dt · |ξ|`.
    pub step_fraction: f64,
    /// Approximate number of recorded samples.
    pub samples: usize,
    pub seed: u64,
    pub jitter: f64,
}

impl CollisionSetup {
    pub fn new(kind: CollisionKind, alpha: f64, impact: f64, closing_speed: f64) -> Self {
        Self {
            kind,
            n: 4,
            alpha,
            gamma: 1.0,
            radius: 1.0,
            impact,
            closing_speed,
            target_at_rest: false,
            start_separation: 8.0,
            run_factor: 2.5,
            step_fraction: 1e-3,
            samples: 4000,
            seed: 0,
            jitter: 0.0,
        }
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius * self.alpha.sin()
    }

    /// Largest drift speed of a single preq whose perturbation stays in the
    /// small-momentum regime.
    pub fn speed_budget(&self) -> AppResult<f64> {
        let form = drift_form_sphere(self.n, self.alpha, self.radius)?;
        Ok(self.radius * form.j1().abs() * self.gamma.abs() * (SMALLNESS_BOUND * self.alpha).sin())
    }

    /// Drift speeds of preqs A and B.
    pub fn speeds(&self) -> (f64, f64) {
        if self.target_at_rest {
            (self.closing_speed, 0.0)
        } else {
            (0.5 * self.closing_speed, 0.5 * self.closing_speed)
        }
    }

    pub fn meeting_time(&self) -> f64 {
        self.start_separation * self.diameter() / self.closing_speed
    }

    /// Builds the scenario; fails with `BudgetExceeded` when a preq would
    /// need a perturbation outside the small-momentum regime.
    pub fn build(&self) -> AppResult<ScenarioConfig> {
        if !(self.closing_speed > 0.0 && self.closing_speed.is_finite()) {
            return Err(AppError::Config("closing speed must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < std::f64::consts::FRAC_PI_4) {
            return Err(AppError::Config("collisions need a small opening angle".into()));
        }
        if !(self.start_separation >= 0.0 && self.run_factor > 0.0) {
            return Err(AppError::Config("start separation and run factor must be positive".into()));
        }
        let r = self.radius;
        let form = drift_form_sphere(self.n, self.alpha, r)?;
        let (va, vb) = self.speeds();
        let total = self.start_separation * self.diameter() / r;
        let (theta_a, theta_b) = if self.target_at_rest {
            (total, 0.0)
        } else {
            (0.5 * total, 0.5 * total)
        };
        let to_equator = rotation_matrix(&(Vec3::y() * std::f64::consts::FRAC_PI_2));
        let tilt = rotation_matrix(&(Vec3::y() * (-self.impact / r)));
        let qa = rotation_matrix(&(Vec3::z() * -theta_a)) * to_equator;
        let qb = tilt * rotation_matrix(&(Vec3::z() * theta_b)) * to_equator;
        let omega_a = Vec3::z() * (va / r);
        let omega_b = tilt * Vec3::z() * (-vb / r);
        let budget = self.speed_budget()?;
        let sign_b = match self.kind {
            CollisionKind::LikePair => 1.0,
            CollisionKind::AntiPair => -1.0,
        };
        let mut preqs = Vec::new();
        for (q, omega, gamma, v) in [(qa, omega_a, self.gamma, va), (qb, omega_b, sign_b * self.gamma, vb)] {
            let dmu = q.transpose() * (omega / form.j1());
            let re = build_sphere_releq(self.n, self.alpha, gamma, r)?;
            let ratio = match build_perturbation(&re, dmu) {
                Ok((spec, _)) => spec.delta_ratio.max(spec.dalpha_ratio),
                Err(_) => f64::INFINITY,
            };
            if ratio >= SMALLNESS_BOUND {
                return Err(AppError::BudgetExceeded {
                    speed: v,
                    budget,
                    ratio: ratio / SMALLNESS_BOUND,
                });
            }
            preqs.push(PreqSpec {
                n: self.n,
                alpha: self.alpha,
                gamma,
                placement: rotation_vector(&q),
                dmu: [dmu.x, dmu.y, dmu.z],
            });
        }
        let re = build_sphere_releq(self.n, self.alpha, self.gamma, r)?;
        let duration = self.run_factor * self.meeting_time();
        let steps = duration * re.generator.norm() / self.step_fraction;
        let record_every = ((steps / self.samples.max(1) as f64) as usize).max(1);
        Ok(ScenarioConfig {
            domain: crate::config::DomainKind::Sphere,
            radius: r,
            preqs,
            integrator: IntegratorSpec {
                dt: None,
                step_fraction: Some(self.step_fraction),
                record_every,
                ..Default::default()
            },
            duration,
            output: OutputPaths::default(),
            seed: self.seed,
            jitter: self.jitter,
            allow_close: self.start_separation < crate::config::MIN_INITIAL_SEPARATION,
            min_separation: 1e-9,
            classifier: Default::default(),
        })
    }
}

fn rotation_vector(q: &Mat3) -> [f64; 3] {
    let v = Rotation3::from_matrix_unchecked(*q).scaled_axis();
    [v.x, v.y, v.z]
}

/// Collision of two preqs with opening angle `alpha` and default settings.
pub fn collision_scenario(kind: CollisionKind, alpha: f64, impact: f64, closing_speed: f64) -> AppResult<ScenarioConfig> {
    CollisionSetup::new(kind, alpha, impact, closing_speed).build()
}

/// Named collision set-ups with their intended outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub setup: CollisionSetup,
    /// Accepted outcome labels.
    pub classifications: &'static [Classification],
    /// Required force sense, if any.
    pub force: Option<ForceSense>,
}

impl Preset {
    pub fn accepts(&self, s: &crate::classify::InteractionSummary) -> bool {
        self.classifications.contains(&s.classification) && self.force.is_none_or(|f| s.force == Some(f))
    }
}

/// Opening angle used by every preset.
pub const PRESET_ALPHA: f64 = std::f64::consts::PI / 64.0;

/// Impact parameters are in preq diameters and closing speeds in units of
/// the single-preq speed budget.
pub fn presets() -> Vec<Preset> {
    let base = |kind| CollisionSetup::new(kind, PRESET_ALPHA, 0.0, 1.0);
    let budget = base(CollisionKind::LikePair).speed_budget().expect("preset opening angle is valid");
    let d = base(CollisionKind::LikePair).diameter();
    let with = |kind, impact: f64, speed: f64, at_rest: bool| CollisionSetup {
        impact: impact * d,
        closing_speed: speed * budget,
        target_at_rest: at_rest,
        ..base(kind)
    };
    vec![
        Preset {
            name: "anti-graze",
            description: "preq and anti-preq passing one diameter apart, closing at half the budget",
            setup: with(CollisionKind::AntiPair, 1.0, 0.5, false),
            classifications: &[Classification::NoInteraction, Classification::ElasticRebound],
            force: Some(ForceSense::Repulsive),
        },
        Preset {
            name: "anti-headon",
            description: "preq and anti-preq meeting head on, closing at the full budget",
            setup: with(CollisionKind::AntiPair, 0.0, 1.0, false),
            classifications: &[Classification::DipoleBreakup],
            force: None,
        },
        Preset {
            name: "like-rest",
            description: "preq passing one diameter from an identical preq at rest, at half the budget",
            setup: with(CollisionKind::LikePair, 1.0, 0.5, true),
            classifications: &[Classification::VortexExchange],
            force: Some(ForceSense::Attractive),
        },
        Preset {
            name: "like-offset",
            description: "identical preqs meeting with a quarter-diameter offset, closing at the full budget",
            setup: with(CollisionKind::LikePair, 0.25, 1.0, false),
            classifications: &[Classification::VortexExchange],
            force: None,
        },
    ]
}

pub fn preset(name: &str) -> Option<Preset> {
    presets().into_iter().find(|p| p.name == name)
}

/// Outcome of one member of a sensitivity probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeTrial {
    pub impact: f64,
    pub classification: Option<Classification>,
    pub force: Option<ForceSense>,
    /// Largest vortex displacement from the unshifted run at the end.
    pub final_displacement: f64,
    pub error: Option<String>,
}

/// Repeats a collision with the impact parameter shifted by multiples of
/// `shift`, in parallel.
pub fn sensitivity_probe(setup: &CollisionSetup, trials: usize, shift: f64) -> AppResult<Vec<ProbeTrial>> {
    let base = simulate(&setup.build()?)?;
    let reference = base.states.last().cloned().unwrap_or_default();
    Ok((1..=trials)
        .into_par_iter()
        .map(|k| {
            let s = CollisionSetup {
                impact: setup.impact + shift * k as f64,
                ..setup.clone()
            };
            let impact = s.impact;
            match s.build().and_then(|c| simulate(&c)) {
                Ok(out) => {
                    let last = out.states.last().cloned().unwrap_or_default();
                    let disp = last
                        .iter()
                        .zip(&reference)
                        .map(|(a, b)| (a - b).norm())
                        .fold(0.0, f64::max);
                    ProbeTrial {
                        impact,
                        classification: Some(out.summary.classification),
                        force: out.summary.force,
                        final_displacement: disp,
                        error: out.failure.map(|(k, e)| format!("step {k}: {e}")),
                    }
                }
                Err(e) => ProbeTrial {
                    impact,
                    classification: None,
                    force: None,
                    final_displacement: f64::NAN,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}
