//! Drift of perturbed equilibria: nilpotent drift forms, preq mass and
//! charge, the monopole drift system, momentum perturbations, and
//! trajectory-based drift-rate estimates.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::domain::Sphere;
use crate::error::{Error, Result};
use crate::integrator::{integrate_with, IntegratorConfig, Recorder};
use crate::math::{frame_from, ls_slope, rotate, rotation_matrix, Vec3, PI, TAU};
use crate::releq::{build_sphere_releq, SphereReleq};

/// Smallness bound applied to `|δ/α|` and `|Δα/α|`.
pub const SMALLNESS_BOUND: f64 = 0.1;
/// Minimum number of windows used by the drift-rate fit by default.
pub const DEFAULT_WINDOWS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriftDomain {
    Sphere { radius: f64 },
    Plane,
}

/// A diagonal bilinear form on the dual algebra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftForm {
    pub entries: [f64; 3],
    pub domain: DriftDomain,
    pub n: usize,
    pub alpha: f64,
}

/// Preq mass; the planar three-vortex preq does not move under any
/// translational perturbation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mass {
    Finite(f64),
    Infinite,
}

impl Mass {
    pub fn value(&self) -> Option<f64> {
        match self {
            Mass::Finite(m) => Some(*m),
            Mass::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Mass::Infinite)
    }
}

impl DriftForm {
    pub fn j1(&self) -> f64 {
        self.entries[0]
    }

    pub fn j2(&self) -> f64 {
        self.entries[1]
    }

    pub fn j3(&self) -> f64 {
        self.entries[2]
    }

    /// Sphere: `−1/(J_N1 R²)`. Plane: the reciprocal of the translational
    /// entry, infinite when it vanishes.
    pub fn mass(&self) -> Mass {
        match self.domain {
            DriftDomain::Sphere { radius } => Mass::Finite(-1.0 / (self.j1() * radius * radius)),
            DriftDomain::Plane => {
                if self.j2() == 0.0 {
                    Mass::Infinite
                } else {
                    Mass::Finite(1.0 / self.j2())
                }
            }
        }
    }
}

pub fn drift_form_sphere(n: usize, alpha: f64, radius: f64) -> Result<DriftForm> {
    let (s, c) = alpha.sin_cos();
    let r2 = radius * radius;
    let s4 = s * s * s * s;
    let entries = match n {
        3 => {
            let j1 = 1.0 / (8.0 * PI * r2 * c);
            let j3 = (2.0 * c * c * c + 3.0 * c * c + 2.0 * c - 1.0) / (8.0 * PI * r2 * s4);
            [j1, j1, j3]
        }
        4 => {
            let j1 = -(3.0 * c * c + c + 2.0)
                / (TAU * r2 * (1.0 - c) * (9.0 * c * c + 4.0 * c + 3.0));
            let j3 = (3.0 * c * c * c + 4.0 * c * c + 3.0 * c - 2.0) / (12.0 * PI * r2 * s4);
            [j1, j1, j3]
        }
        _ => return Err(Error::UnsupportedN(n)),
    };
    Ok(DriftForm {
        entries,
        domain: DriftDomain::Sphere { radius },
        n,
        alpha,
    })
}

/// Planar drift form in the basis `(μ, Re ν, Im ν)`; `alpha` is the ring radius.
pub fn drift_form_plane(n: usize, alpha: f64) -> Result<DriftForm> {
    let entries = match n {
        3 => [-0.75 / (TAU * alpha.powi(4)), 0.0, 0.0],
        4 => {
            let k = 1.0 / (TAU * alpha * alpha);
            [-4.0 / 3.0 * k, 0.75 * k, 0.75 * k]
        }
        _ => return Err(Error::UnsupportedN(n)),
    };
    Ok(DriftForm {
        entries,
        domain: DriftDomain::Plane,
        n,
        alpha,
    })
}

pub fn mass_sphere(n: usize, alpha: f64, radius: f64) -> Result<Mass> {
    Ok(drift_form_sphere(n, alpha, radius)?.mass())
}

pub fn mass_plane(n: usize, alpha: f64) -> Result<Mass> {
    Ok(drift_form_plane(n, alpha)?.mass())
}

/// Result of [`build_perturbation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec {
    /// Requested momentum change.
    pub dmu: Vec3,
    /// Components in the canonical frame, where the second one vanishes.
    pub dmu1: f64,
    pub dmu3: f64,
    /// Rotation about `k` taking the canonical frame to the requested one.
    pub azimuth: f64,
    /// Displacement angle of the central vortex.
    pub delta: f64,
    /// Change of the opening angle.
    pub dalpha: f64,
    pub delta_ratio: f64,
    pub dalpha_ratio: f64,
    /// Set when either ratio is at least [`SMALLNESS_BOUND`].
    pub warning: bool,
}

impl PerturbationSpec {
    pub fn within_budget(&self) -> bool {
        !self.warning
    }
}

/// Displaces the central vortex and re-opens the ring so the momentum of
/// the canonical equilibrium `re` becomes `dmu`.
pub fn build_perturbation(re: &SphereReleq, dmu: Vec3) -> Result<(PerturbationSpec, Vec<Vec3>)> {
    let n = re.n;
    let r = re.radius();
    let gamma = re.gamma;
    let g1 = re.system.strengths()[0];
    let (dmu1, azimuth) = if dmu.y == 0.0 {
        (dmu.x, 0.0)
    } else {
        (dmu.x.hypot(dmu.y), dmu.y.atan2(dmu.x))
    };
    let dmu3 = dmu.z;
    let sd = -dmu1 / gamma;
    if !(sd.abs() <= 1.0) {
        return Err(Error::NoSolution("|Δμ₁/Γ| exceeds 1"));
    }
    let delta = sd.asin();
    let cd = delta.cos();
    let shift = -(dmu3 + gamma * (cd - 1.0)) / ((n as f64 - 1.0) * g1);
    let c_new = re.alpha.cos() + shift;
    if !(c_new.abs() < 1.0) {
        return Err(Error::NoSolution("no opening angle in (0, π) matches Δμ₃"));
    }
    let alpha_new = if shift == 0.0 { re.alpha } else { c_new.acos() };
    let dalpha = alpha_new - re.alpha;
    let (sa, ca) = alpha_new.sin_cos();
    let rot = rotation_matrix(&(Vec3::z() * azimuth));
    let m = n - 1;
    let mut state = Vec::with_capacity(n);
    for k in 0..m {
        let (sp, cp) = (TAU * k as f64 / m as f64).sin_cos();
        state.push(rot * Vec3::new(r * sa * cp, r * sa * sp, r * ca));
    }
    state.push(rot * Vec3::new(r * delta.sin(), 0.0, r * cd));
    let delta_ratio = (delta / re.alpha).abs();
    let dalpha_ratio = (dalpha / re.alpha).abs();
    Ok((
        PerturbationSpec {
            dmu,
            dmu1,
            dmu3,
            azimuth,
            delta,
            dalpha,
            delta_ratio,
            dalpha_ratio,
            warning: !(delta_ratio < SMALLNESS_BOUND && dalpha_ratio < SMALLNESS_BOUND),
        },
        state,
    ))
}

/// First-order drift of a perturbed preq: rotation of the location about
/// `Δμ` with angular velocity `J_N1 Δμ`, and the monopole initial data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftPrediction {
    pub form: DriftForm,
    pub dmu: Vec3,
    pub radius: f64,
    pub mass: f64,
    /// Charge `σ = −Δμ·k`.
    pub charge_sigma: f64,
    pub angular_velocity: Vec3,
    /// Unit axis along `Δμ` (zero if `Δμ = 0`).
    pub axis: Vec3,
    pub y0: Vec3,
    pub v0: Vec3,
}

pub fn predict_drift(re: &SphereReleq, dmu: Vec3) -> Result<DriftPrediction> {
    let radius = re.radius();
    let form = drift_form_sphere(re.n, re.alpha, radius)?;
    let mass = -1.0 / (form.j1() * radius * radius);
    let y0 = Vec3::new(0.0, 0.0, radius);
    let norm = dmu.norm();
    Ok(DriftPrediction {
        form,
        dmu,
        radius,
        mass,
        charge_sigma: -dmu.z,
        angular_velocity: dmu * form.j1(),
        axis: if norm > 0.0 { dmu / norm } else { Vec3::zeros() },
        y0,
        v0: y0.cross(&dmu) / (mass * radius * radius),
    })
}

impl DriftPrediction {
    /// Location on the predicted circle at time `t`.
    pub fn location(&self, t: f64) -> Vec3 {
        rotate(&self.angular_velocity, t, &self.y0)
    }

    pub fn velocity(&self, t: f64) -> Vec3 {
        self.angular_velocity.cross(&self.location(t))
    }

    /// Rotation rate about `Δμ` (signed; negative is clockwise seen from `Δμ`).
    pub fn rate(&self) -> f64 {
        self.angular_velocity.dot(&self.axis)
    }

    pub fn period(&self) -> f64 {
        TAU / self.angular_velocity.norm()
    }

    fn acceleration(&self, y: &Vec3, v: &Vec3) -> Vec3 {
        let r = self.radius;
        let b = y / (r * r * r);
        -y * (v.norm_squared() / (r * r)) + b.cross(v) * (self.charge_sigma / self.mass)
    }

    /// RK4 solution of the monopole equation, reprojected onto the sphere
    /// (and the velocity onto its tangent plane) after each step.
    pub fn integrate_monopole(&self, dt: f64, steps: usize) -> Vec<(f64, Vec3, Vec3)> {
        let mut out = Vec::with_capacity(steps + 1);
        let (mut y, mut v) = (self.y0, self.v0);
        out.push((0.0, y, v));
        for k in 1..=steps {
            let a1 = self.acceleration(&y, &v);
            let (y2, v2) = (y + v * (0.5 * dt), v + a1 * (0.5 * dt));
            let a2 = self.acceleration(&y2, &v2);
            let (y3, v3) = (y + v2 * (0.5 * dt), v + a2 * (0.5 * dt));
            let a3 = self.acceleration(&y3, &v3);
            let (y4, v4) = (y + v3 * dt, v + a3 * dt);
            let a4 = self.acceleration(&y4, &v4);
            y += (v + v2 * 2.0 + v3 * 2.0 + v4) * (dt / 6.0);
            v += (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (dt / 6.0);
            y *= self.radius / y.norm();
            let u = y / self.radius;
            v -= u * u.dot(&v);
            out.push((k as f64 * dt, y, v));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LocationMethod {
    #[default]
    MeanOfVortices,
    CentralVortex,
}

/// Location of a preq whose vortices are `points`, the central one last.
pub fn preq_location(points: &[Vec3], method: LocationMethod, radius: f64) -> Result<Vec3> {
    match method {
        LocationMethod::MeanOfVortices => {
            let mean = points.iter().fold(Vec3::zeros(), |a, x| a + x) / points.len() as f64;
            let n = mean.norm();
            if n < 1e-9 * radius {
                return Err(Error::DegenerateMean);
            }
            Ok(mean * (radius / n))
        }
        LocationMethod::CentralVortex => points.last().copied().ok_or(Error::DegenerateMean),
    }
}

/// Drift-rate estimate from sampled preq locations.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftRate {
    /// Mean of the per-window rates.
    pub mean_rate: f64,
    /// Least-squares rate over all samples.
    pub overall_rate: f64,
    pub window_rates: Vec<f64>,
    pub std_dev: f64,
}

/// Angular rate about `axis` (right-handed, so negative is clockwise seen
/// from `axis`) of the sampled `locations`, overall and over `windows`
/// consecutive windows.
pub fn estimate_drift_rate(times: &[f64], locations: &[Vec3], axis: Vec3, windows: usize) -> Result<DriftRate> {
    let windows = windows.max(1);
    let needed = 2 * windows;
    if times.len() < needed || locations.len() != times.len() {
        return Err(Error::InsufficientSamples {
            needed,
            found: times.len().min(locations.len()),
        });
    }
    if axis.norm() == 0.0 {
        return Err(Error::Domain("drift axis must be nonzero"));
    }
    let frame = frame_from(&axis, &Vec3::x())
        .or_else(|| frame_from(&axis, &Vec3::y()))
        .ok_or(Error::Domain("drift axis must be nonzero"))?;
    let (e1, e2) = (frame.column(0).into_owned(), frame.column(1).into_owned());
    let mut phase = Vec::with_capacity(locations.len());
    let mut prev = 0.0;
    let mut offset = 0.0;
    for (i, y) in locations.iter().enumerate() {
        let a = y.dot(&e2).atan2(y.dot(&e1));
        if i > 0 {
            let d = a - prev;
            if d > PI {
                offset -= TAU;
            } else if d < -PI {
                offset += TAU;
            }
        }
        prev = a;
        phase.push(a + offset);
    }
    let overall_rate = ls_slope(times, &phase);
    let len = times.len();
    let mut window_rates = Vec::with_capacity(windows);
    for w in 0..windows {
        let lo = w * len / windows;
        let hi = (w + 1) * len / windows;
        window_rates.push(ls_slope(&times[lo..hi], &phase[lo..hi]));
    }
    let mean_rate = window_rates.iter().sum::<f64>() / windows as f64;
    let var = window_rates.iter().map(|r| (r - mean_rate) * (r - mean_rate)).sum::<f64>() / windows as f64;
    Ok(DriftRate {
        mean_rate,
        overall_rate,
        window_rates,
        std_dev: var.sqrt(),
    })
}

/// Settings of a simulated drift measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftRun {
    pub dt: f64,
    pub duration: f64,
    pub windows: usize,
    pub samples_per_window: usize,
    pub location: LocationMethod,
}

impl DriftRun {
    /// A run lasting `turns` predicted drift periods with
    /// `dt·|ξ_e| = step_fraction`.
    pub fn for_prediction(re: &SphereReleq, pred: &DriftPrediction, turns: f64, step_fraction: f64) -> Self {
        Self {
            dt: step_fraction / re.generator.norm(),
            duration: turns * pred.period(),
            windows: DEFAULT_WINDOWS,
            samples_per_window: 20,
            location: LocationMethod::MeanOfVortices,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftMeasurement {
    pub dmu: Vec3,
    pub rate: DriftRate,
    pub predicted_rate: f64,
    pub max_momentum_error: f64,
    pub max_relative_energy_error: f64,
}

impl DriftMeasurement {
    /// Measured `|rate| / |Δμ|`.
    pub fn rate_over_dmu(&self) -> f64 {
        self.rate.mean_rate.abs() / self.dmu.norm()
    }
}

struct LocationRecorder {
    radius: f64,
    method: LocationMethod,
    times: Vec<f64>,
    locations: Vec<Vec3>,
    h0: Option<f64>,
    j0: Option<[f64; 3]>,
    max_dh: f64,
    max_dj: f64,
    error: Option<Error>,
}

impl Recorder<Sphere> for LocationRecorder {
    fn record(&mut self, t: f64, state: &[Vec3], energy: f64, momentum: [f64; 3]) {
        let h0 = *self.h0.get_or_insert(energy);
        let j0 = *self.j0.get_or_insert(momentum);
        self.max_dh = self.max_dh.max(((energy - h0) / h0).abs());
        for i in 0..3 {
            self.max_dj = self.max_dj.max((momentum[i] - j0[i]).abs());
        }
        match preq_location(state, self.method, self.radius) {
            Ok(y) => {
                self.times.push(t);
                self.locations.push(y);
            }
            Err(e) => {
                self.error.get_or_insert(e);
            }
        }
    }
}

/// Perturbs the canonical equilibrium by `dmu`, integrates, and fits the
/// drift rate about `dmu`.
pub fn measure_drift(re: &SphereReleq, dmu: Vec3, run: &DriftRun) -> Result<DriftMeasurement> {
    let pred = predict_drift(re, dmu)?;
    let (_, state) = build_perturbation(re, dmu)?;
    let steps = (run.duration / run.dt).ceil() as usize;
    let samples = run.windows * run.samples_per_window.max(2);
    let every = (steps / samples).max(1);
    let cfg = IntegratorConfig::new(run.dt).with_record_every(every);
    let mut rec = LocationRecorder {
        radius: re.radius(),
        method: run.location,
        times: Vec::new(),
        locations: Vec::new(),
        h0: None,
        j0: None,
        max_dh: 0.0,
        max_dj: 0.0,
        error: None,
    };
    integrate_with(&re.system, &state, &cfg, steps, &mut rec).map_err(|f| f.error)?;
    if let Some(e) = rec.error {
        return Err(e);
    }
    let rate = estimate_drift_rate(&rec.times, &rec.locations, dmu, run.windows)?;
    Ok(DriftMeasurement {
        dmu,
        rate,
        predicted_rate: pred.rate(),
        max_momentum_error: rec.max_dj,
        max_relative_energy_error: rec.max_dh,
    })
}

/// Least-squares fit `rate = c₁x + c₂x² + c₃x³`; returns `(c₁, c₂, c₃)`.
/// `c₁` is the intercept of `rate/x`.
pub fn fit_odd_cubic_through_origin(x: &[f64], rate: &[f64]) -> Result<[f64; 3]> {
    if x.len() < 3 || x.len() != rate.len() {
        return Err(Error::InsufficientSamples {
            needed: 3,
            found: x.len().min(rate.len()),
        });
    }
    let a = DMatrix::from_fn(x.len(), 3, |i, j| x[i].powi(j as i32 + 1));
    let b = DVector::from_column_slice(rate);
    let svd = a.svd(true, true);
    let c = svd
        .solve(&b, 1e-14)
        .map_err(|_| Error::NoSolution("degenerate cubic fit"))?;
    Ok([c[0], c[1], c[2]])
}

/// Comparison of `|J_N1|` with the simulated drift rate extrapolated to
/// vanishing momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct CrosscheckReport {
    pub predicted: f64,
    pub intercept: f64,
    pub coefficients: [f64; 3],
    pub discrepancy: f64,
    pub measurements: Vec<DriftMeasurement>,
}

/// Fits measured `|rate|` against `|Δμ|` and compares the slope at zero to
/// `|J_N1|`. The measurements are typically produced by [`measure_drift`]
/// at several multiples of one direction.
pub fn drift_form_crosscheck(re: &SphereReleq, measurements: Vec<DriftMeasurement>) -> Result<CrosscheckReport> {
    let form = drift_form_sphere(re.n, re.alpha, re.radius())?;
    let x: Vec<f64> = measurements.iter().map(|m| m.dmu.norm()).collect();
    let y: Vec<f64> = measurements.iter().map(|m| m.rate.mean_rate.abs()).collect();
    let coefficients = fit_odd_cubic_through_origin(&x, &y)?;
    let predicted = form.j1().abs();
    Ok(CrosscheckReport {
        predicted,
        intercept: coefficients[0],
        coefficients,
        discrepancy: ((coefficients[0] - predicted) / predicted).abs(),
        measurements,
    })
}

/// Convenience: the canonical sphere equilibrium plus its drift form.
pub fn canonical_preq(n: usize, alpha: f64, gamma: f64, radius: f64) -> Result<(SphereReleq, DriftForm)> {
    Ok((build_sphere_releq(n, alpha, gamma, radius)?, drift_form_sphere(n, alpha, radius)?))
}
