//! Builds multi-preq initial states from a configuration, integrates them
//! and writes the trajectory, interaction summary and conservation report.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use preq_core::drift::{build_perturbation, drift_form_sphere};
use preq_core::integrator::{integrate_with, Recorder};
use preq_core::math::rotation_matrix;
use preq_core::releq::{build_planar_releq, build_sphere_releq};
use preq_core::{Complex64, Plane, Se2Element, Sphere, Vec3, VortexSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classify::{classify_interaction, shape_of, FreeFlight, GroupLayout, InteractionSummary};
use crate::config::{DomainKind, ScenarioConfig, MIN_INITIAL_SEPARATION};
use crate::error::{AppError, AppResult};
use crate::io::{CsvDomain, TrajectoryWriter};

/// Points that can be placed in ℝ³ for the classifier.
pub trait Embed: CsvDomain {
    fn embed(p: &Self::Point) -> Vec3;
}

impl Embed for Sphere {
    fn embed(p: &Vec3) -> Vec3 {
        *p
    }
}

impl Embed for Plane {
    fn embed(p: &Complex64) -> Vec3 {
        Vec3::new(p.re, p.im, 0.0)
    }
}

/// The composed initial state of a scenario.
#[derive(Debug, Clone)]
pub struct Composed<D: Embed> {
    pub system: VortexSystem<D>,
    pub state: Vec<D::Point>,
    pub layout: GroupLayout,
    /// Largest equilibrium rotation rate.
    pub fastest_rate: f64,
    pub warnings: Vec<String>,
}

fn jitter_rng(cfg: &ScenarioConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

fn random_offset(rng: &mut ChaCha8Rng, size: f64) -> Vec3 {
    if size == 0.0 {
        return Vec3::zeros();
    }
    Vec3::new(
        rng.gen_range(-size..=size),
        rng.gen_range(-size..=size),
        rng.gen_range(-size..=size),
    )
}

fn finish<D: Embed>(
    cfg: &ScenarioConfig,
    domain: D,
    strengths: Vec<f64>,
    state: Vec<D::Point>,
    mut layout: GroupLayout,
    fastest_rate: f64,
    warnings: Vec<String>,
) -> AppResult<Composed<D>> {
    let system = VortexSystem::new(domain, strengths)?.with_min_separation(cfg.min_separation);
    let embedded: Vec<Vec3> = state.iter().map(D::embed).collect();
    let means: Vec<Vec3> = layout
        .groups
        .iter()
        .map(|g| g.iter().map(|&i| embedded[i]).sum::<Vec3>() / g.len() as f64)
        .collect();
    if let Some(ff) = layout.free_flight.as_mut() {
        for (f, m) in ff.iter_mut().zip(&means) {
            let m = match layout.radius {
                Some(r) => m * (r / m.norm()),
                None => *m,
            };
            f.start = [m.x, m.y, m.z];
        }
    }
    if !cfg.allow_close {
        for a in 0..means.len() {
            for b in a + 1..means.len() {
                let need = MIN_INITIAL_SEPARATION * layout.diameters[a].max(layout.diameters[b]);
                let d = (means[a] - means[b]).norm();
                if d < need {
                    return Err(AppError::Config(format!(
                        "preqs {a} and {b} start {d:.4} apart, closer than {MIN_INITIAL_SEPARATION} diameters ({need:.4}); set allow_close to permit this"
                    )));
                }
            }
        }
    }
    system.check_state(&state)?;
    Ok(Composed {
        system,
        state,
        layout,
        fastest_rate,
        warnings,
    })
}

/// Places, rotates and perturbs every preq of a sphere scenario.
pub fn compose_sphere(cfg: &ScenarioConfig) -> AppResult<Composed<Sphere>> {
    cfg.validate()?;
    let r = cfg.radius;
    let mut rng = jitter_rng(cfg);
    let (mut strengths, mut state, mut layout) = (Vec::new(), Vec::new(), empty_layout(Some(r)));
    let mut free = Some(Vec::new());
    let mut fastest: f64 = 0.0;
    let mut warnings = Vec::new();
    for (i, p) in cfg.preqs.iter().enumerate() {
        let re = build_sphere_releq(p.n, p.alpha, p.gamma, r)?;
        fastest = fastest.max(re.generator.norm());
        let dmu = Vec3::from(p.dmu);
        let local = if dmu == Vec3::zeros() {
            re.state.clone()
        } else {
            let (spec, s) = build_perturbation(&re, dmu)?;
            if !spec.within_budget() {
                warnings.push(format!(
                    "preq {i}: perturbation outside the small-momentum regime (ratios {:.3}, {:.3})",
                    spec.delta_ratio, spec.dalpha_ratio
                ));
            }
            s
        };
        let q = rotation_matrix(&random_offset(&mut rng, cfg.jitter)) * rotation_matrix(&Vec3::from(p.placement));
        let offset = state.len();
        state.extend(local.iter().map(|x| q * x));
        strengths.extend_from_slice(re.system.strengths());
        layout.groups.push((offset..offset + p.n).collect());
        layout.diameters.push(2.0 * r * p.alpha.sin());
        layout.reference_shapes.push(shape_of(&re.state));
        free = match (free, drift_form_sphere(p.n, p.alpha, r)) {
            (Some(mut v), Ok(form)) => {
                let w = q * (dmu * form.j1());
                v.push(FreeFlight {
                    start: [0.0; 3],
                    omega: [w.x, w.y, w.z],
                });
                Some(v)
            }
            _ => None,
        };
    }
    layout.strengths = strengths.clone();
    layout.free_flight = free;
    finish(cfg, Sphere::new(r), strengths, state, layout, fastest, warnings)
}

/// Places every (unperturbed) preq of a plane scenario.
pub fn compose_plane(cfg: &ScenarioConfig) -> AppResult<Composed<Plane>> {
    cfg.validate()?;
    let mut rng = jitter_rng(cfg);
    let (mut strengths, mut state, mut layout) = (Vec::new(), Vec::new(), empty_layout(None));
    let mut free = Vec::new();
    let mut fastest: f64 = 0.0;
    for p in &cfg.preqs {
        let re = build_planar_releq(p.n, p.alpha, p.gamma)?;
        fastest = fastest.max(re.generator.rate.abs());
        let jitter = random_offset(&mut rng, cfg.jitter);
        let g = Se2Element::new(
            p.placement[0],
            Complex64::new(p.placement[1] + jitter.x, p.placement[2] + jitter.y),
        );
        let offset = state.len();
        state.extend(re.state.iter().map(|z| g.act(*z)));
        strengths.extend_from_slice(re.system.strengths());
        layout.groups.push((offset..offset + p.n).collect());
        layout.diameters.push(2.0 * p.alpha);
        layout
            .reference_shapes
            .push(shape_of(&re.state.iter().map(Plane::embed).collect::<Vec<_>>()));
        free.push(FreeFlight {
            start: [0.0; 3],
            omega: [0.0; 3],
        });
    }
    layout.strengths = strengths.clone();
    layout.free_flight = Some(free);
    finish(cfg, Plane, strengths, state, layout, fastest, Vec::new())
}

fn empty_layout(radius: Option<f64>) -> GroupLayout {
    GroupLayout {
        groups: Vec::new(),
        strengths: Vec::new(),
        diameters: Vec::new(),
        reference_shapes: Vec::new(),
        free_flight: None,
        radius,
    }
}

/// Energy and momentum bookkeeping of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationReport {
    pub dt: f64,
    pub steps: usize,
    pub completed_steps: usize,
    pub samples: usize,
    pub renormalizations: usize,
    pub initial_energy: f64,
    pub initial_momentum: [f64; 3],
    pub max_relative_energy_error: f64,
    pub max_momentum_error: f64,
    pub failure: Option<String>,
}

impl ConservationReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| s.push_str(&format!("{k:<28} {v}\n"));
        line("dt", format!("{:.16e}", self.dt));
        line("steps", format!("{} of {}", self.completed_steps, self.steps));
        line("samples", self.samples.to_string());
        line("renormalizations", self.renormalizations.to_string());
        line("initial energy", format!("{:.16e}", self.initial_energy));
        let j = self.initial_momentum;
        line("initial momentum", format!("{:.16e} {:.16e} {:.16e}", j[0], j[1], j[2]));
        line("max |dH|/|H|", format!("{:.6e}", self.max_relative_energy_error));
        line("max |dJ|", format!("{:.6e}", self.max_momentum_error));
        line("status", self.failure.clone().unwrap_or_else(|| "completed".into()));
        s
    }
}

struct ScenarioRecorder<W: Write> {
    writer: Option<TrajectoryWriter<W>>,
    io_error: Option<std::io::Error>,
    times: Vec<f64>,
    states: Vec<Vec<Vec3>>,
    h0: Option<f64>,
    j0: Option<[f64; 3]>,
    max_dh: f64,
    max_dj: f64,
}

impl<D: Embed, W: Write> Recorder<D> for ScenarioRecorder<W> {
    fn record(&mut self, t: f64, state: &[D::Point], energy: f64, momentum: [f64; 3]) {
        let h0 = *self.h0.get_or_insert(energy);
        let j0 = *self.j0.get_or_insert(momentum);
        self.max_dh = self.max_dh.max(((energy - h0) / h0).abs());
        for i in 0..3 {
            self.max_dj = self.max_dj.max((momentum[i] - j0[i]).abs());
        }
        self.times.push(t);
        self.states.push(state.iter().map(D::embed).collect());
        if let Some(w) = self.writer.as_mut() {
            if let Err(e) = w.write_row::<D>(t, state, energy, momentum) {
                self.io_error = Some(e);
                self.writer = None;
            }
        }
    }
}

/// Everything a run produces, in memory.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioOutcome {
    pub summary: InteractionSummary,
    pub conservation: ConservationReport,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub times: Vec<f64>,
    /// Sampled vortex positions (plane points embedded with zero `z`).
    #[serde(skip)]
    pub states: Vec<Vec<Vec3>>,
    #[serde(skip)]
    pub failure: Option<(usize, preq_core::Error)>,
}

impl ScenarioOutcome {
    /// Mean location of preq `g` at every sample.
    pub fn track(&self, g: usize) -> Vec<Vec3> {
        let members = &self.summary.initial_groups[g];
        self.states
            .iter()
            .map(|s| members.iter().map(|&i| s[i]).sum::<Vec3>() / members.len() as f64)
            .collect()
    }
}

fn simulate_composed<D: Embed, W: Write>(
    cfg: &ScenarioConfig,
    c: Composed<D>,
    sink: Option<W>,
) -> AppResult<(ScenarioOutcome, Option<std::io::Result<W>>)> {
    let icfg = cfg.integrator.to_config(c.fastest_rate)?;
    let every = icfg.record_every;
    let steps = ((cfg.duration / icfg.dt).ceil() as usize).div_ceil(every) * every;
    let writer = match sink {
        Some(w) => Some(TrajectoryWriter::new::<D>(w, c.state.len()).map_err(|e| AppError::io("trajectory", e))?),
        None => None,
    };
    let mut rec = ScenarioRecorder {
        writer,
        io_error: None,
        times: Vec::new(),
        states: Vec::new(),
        h0: None,
        j0: None,
        max_dh: 0.0,
        max_dj: 0.0,
    };
    let result = integrate_with(&c.system, &c.state, &icfg, steps, &mut rec);
    let (stats, failure) = match result {
        Ok(s) => (s, None),
        Err(f) => (f.stats, Some((f.step, f.error))),
    };
    let summary = classify_interaction(&rec.times, &rec.states, &c.layout, &cfg.classifier);
    let conservation = ConservationReport {
        dt: icfg.dt,
        steps,
        completed_steps: stats.steps,
        samples: stats.samples,
        renormalizations: stats.renormalizations,
        initial_energy: rec.h0.unwrap_or(f64::NAN),
        initial_momentum: rec.j0.unwrap_or([f64::NAN; 3]),
        max_relative_energy_error: rec.max_dh,
        max_momentum_error: rec.max_dj,
        failure: failure.as_ref().map(|(k, e)| format!("failed at step {k}: {e}")),
    };
    let out = match (rec.writer.take(), rec.io_error.take()) {
        (_, Some(e)) => Some(Err(e)),
        (Some(w), None) => Some(w.finish()),
        (None, None) => None,
    };
    Ok((
        ScenarioOutcome {
            summary,
            conservation,
            warnings: c.warnings,
            times: rec.times,
            states: rec.states,
            failure,
        },
        out,
    ))
}

/// Runs a scenario without writing files. Integration failures are
/// reported in `failure` together with everything recorded before them.
pub fn simulate(cfg: &ScenarioConfig) -> AppResult<ScenarioOutcome> {
    simulate_with_sink::<std::io::Sink>(cfg, None).map(|(o, _)| o)
}

/// Runs a scenario, streaming the trajectory CSV into `sink`.
pub fn simulate_with_sink<W: Write>(cfg: &ScenarioConfig, sink: Option<W>) -> AppResult<(ScenarioOutcome, Option<W>)> {
    let (outcome, out) = match cfg.domain {
        DomainKind::Sphere => simulate_composed(cfg, compose_sphere(cfg)?, sink)?,
        DomainKind::Plane => simulate_composed(cfg, compose_plane(cfg)?, sink)?,
    };
    let w = match out {
        Some(Ok(w)) => Some(w),
        Some(Err(e)) => return Err(AppError::io("trajectory", e)),
        None => None,
    };
    Ok((outcome, w))
}

/// Files written by [`run_scenario`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFiles {
    pub trajectory: PathBuf,
    pub summary: PathBuf,
    pub report: PathBuf,
}

impl ScenarioFiles {
    pub fn all(&self) -> Vec<PathBuf> {
        vec![self.trajectory.clone(), self.summary.clone(), self.report.clone()]
    }
}

/// Runs a scenario and writes its trajectory CSV, interaction summary JSON
/// and conservation report into `out_dir`. A failed integration still
/// writes all three files and then returns [`AppError::Integration`].
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> AppResult<(ScenarioOutcome, ScenarioFiles)> {
    std::fs::create_dir_all(out_dir).map_err(|e| AppError::io(out_dir, e))?;
    let files = ScenarioFiles {
        trajectory: out_dir.join(&cfg.output.trajectory),
        summary: out_dir.join(&cfg.output.summary),
        report: out_dir.join(&cfg.output.report),
    };
    let csv = File::create(&files.trajectory).map_err(|e| AppError::io(&files.trajectory, e))?;
    let (outcome, _) = simulate_with_sink(cfg, Some(BufWriter::new(csv)))?;
    let json = serde_json::to_string_pretty(&outcome)?;
    std::fs::write(&files.summary, json + "\n").map_err(|e| AppError::io(&files.summary, e))?;
    let mut report = outcome.conservation.to_text();
    for w in &outcome.warnings {
        report.push_str(&format!("warning: {w}\n"));
    }
    std::fs::write(&files.report, report).map_err(|e| AppError::io(&files.report, e))?;
    if let Some((step, e)) = &outcome.failure {
        return Err(AppError::Integration {
            step: *step,
            source: e.clone(),
            partial: files.all(),
        });
    }
    Ok((outcome, files))
}
