//! Splitting integrator: the Hamiltonian is a sum of pair terms, and each
//! substep advances one pair by its exact two-vortex flow.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::domain::{lexicographic_pairs, Domain};
use crate::error::{Error, Result};
use crate::system::VortexSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Every pair flow once, in order, for the full step.
    LieTrotter,
    /// Half step in order followed by a half step in reverse order.
    #[default]
    Strang,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum PairOrder {
    /// `(m, n)` with `m < n`, sorted lexicographically.
    #[default]
    Lexicographic,
    Custom(Vec<(usize, usize)>),
}

impl PairOrder {
    pub fn pairs(&self, n: usize) -> Result<Vec<(usize, usize)>> {
        match self {
            PairOrder::Lexicographic => Ok(lexicographic_pairs(n)),
            PairOrder::Custom(p) => {
                let mut seen = lexicographic_pairs(n);
                if p.len() != seen.len() {
                    return Err(Error::InvalidSystem("pair order must list every pair once"));
                }
                for &(a, b) in p {
                    let key = if a < b { (a, b) } else { (b, a) };
                    match seen.iter().position(|q| *q == key) {
                        Some(i) => {
                            seen.swap_remove(i);
                        }
                        None => return Err(Error::InvalidSystem("pair order must list every pair once")),
                    }
                }
                Ok(p.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    /// Time step. Negative values integrate backwards in [`step`].
    pub dt: f64,
    pub method: Method,
    pub pair_order: PairOrder,
    /// Record one sample every this many steps.
    pub record_every: usize,
}

impl IntegratorConfig {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            method: Method::Strang,
            pair_order: PairOrder::Lexicographic,
            record_every: 1,
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_record_every(mut self, k: usize) -> Self {
        self.record_every = k;
        self
    }

    pub fn with_pair_order(mut self, order: PairOrder) -> Self {
        self.pair_order = order;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidSystem("dt must be positive and finite"));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidSystem("record_every must be at least 1"));
        }
        Ok(())
    }
}

/// Advances the pair `(m, n)` by time `t` in place. Returns the number of
/// points reprojected onto the phase space.
pub fn apply_pair_flow<D: Domain>(
    sys: &VortexSystem<D>,
    points: &mut [D::Point],
    (m, n): (usize, usize),
    t: f64,
) -> Result<usize> {
    let d = sys.domain();
    let sep = d.separation_sq(&points[m], &points[n]).sqrt();
    if !(sep >= sys.min_separation()) {
        return Err(Error::Collision {
            pair: (m, n),
            separation: sep,
        });
    }
    let g = sys.strengths();
    let (a, b) = d.pair_flow(&points[m], &points[n], g[m], g[n], t);
    points[m] = a;
    points[n] = b;
    Ok(d.renormalize(&mut points[m]) as usize + d.renormalize(&mut points[n]) as usize)
}

fn sweep<D: Domain>(
    sys: &VortexSystem<D>,
    points: &mut [D::Point],
    pairs: &[(usize, usize)],
    t: f64,
    reverse: bool,
) -> Result<usize> {
    let mut count = 0;
    if reverse {
        for &p in pairs.iter().rev() {
            count += apply_pair_flow(sys, points, p, t)?;
        }
    } else {
        for &p in pairs {
            count += apply_pair_flow(sys, points, p, t)?;
        }
    }
    Ok(count)
}

fn step_with_pairs<D: Domain>(
    sys: &VortexSystem<D>,
    points: &mut [D::Point],
    pairs: &[(usize, usize)],
    dt: f64,
    method: Method,
) -> Result<usize> {
    match method {
        Method::LieTrotter => sweep(sys, points, pairs, dt, false),
        Method::Strang => {
            let h = 0.5 * dt;
            Ok(sweep(sys, points, pairs, h, false)? + sweep(sys, points, pairs, h, true)?)
        }
    }
}

/// One step in place; returns the renormalization count.
pub fn step_in_place<D: Domain>(
    sys: &VortexSystem<D>,
    points: &mut [D::Point],
    cfg: &IntegratorConfig,
) -> Result<usize> {
    sys.check_len(points)?;
    sys.check_collisions(points)?;
    let pairs = cfg.pair_order.pairs(points.len())?;
    step_with_pairs(sys, points, &pairs, cfg.dt, cfg.method)
}

/// One step of the configured method.
pub fn step<D: Domain>(
    sys: &VortexSystem<D>,
    points: &[D::Point],
    cfg: &IntegratorConfig,
) -> Result<Vec<D::Point>> {
    let mut out = points.to_vec();
    step_in_place(sys, &mut out, cfg)?;
    Ok(out)
}

/// Receives every recorded sample of an integration.
pub trait Recorder<D: Domain> {
    fn record(&mut self, t: f64, state: &[D::Point], energy: f64, momentum: [f64; 3]);
}

impl<D: Domain, F: FnMut(f64, &[D::Point], f64, [f64; 3])> Recorder<D> for F {
    fn record(&mut self, t: f64, state: &[D::Point], energy: f64, momentum: [f64; 3]) {
        self(t, state, energy, momentum)
    }
}

/// Sampled states with the energy and momentum ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<D: Domain> {
    pub times: Vec<f64>,
    pub states: Vec<Vec<D::Point>>,
    pub energy: Vec<f64>,
    pub momentum: Vec<[f64; 3]>,
    pub renormalizations: usize,
}

impl<D: Domain> Default for Trajectory<D> {
    fn default() -> Self {
        Self {
            times: Vec::new(),
            states: Vec::new(),
            energy: Vec::new(),
            momentum: Vec::new(),
            renormalizations: 0,
        }
    }
}

impl<D: Domain> Recorder<D> for Trajectory<D> {
    fn record(&mut self, t: f64, state: &[D::Point], energy: f64, momentum: [f64; 3]) {
        self.times.push(t);
        self.states.push(state.to_vec());
        self.energy.push(energy);
        self.momentum.push(momentum);
    }
}

impl<D: Domain> Trajectory<D> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> Option<&[D::Point]> {
        self.states.last().map(|s| s.as_slice())
    }

    /// `max |H(t) − H(0)| / |H(0)|` over the samples.
    pub fn max_relative_energy_error(&self) -> f64 {
        let Some(&h0) = self.energy.first() else { return 0.0 };
        self.energy
            .iter()
            .map(|h| (h - h0).abs() / h0.abs())
            .fold(0.0, f64::max)
    }

    /// Largest absolute change of any momentum component.
    pub fn max_momentum_error(&self) -> f64 {
        let Some(j0) = self.momentum.first() else { return 0.0 };
        self.momentum
            .iter()
            .flat_map(|j| (0..3).map(move |i| (j[i] - j0[i]).abs()))
            .fold(0.0, f64::max)
    }
}

/// Summary of an integration driven through [`integrate_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunStats {
    pub steps: usize,
    pub samples: usize,
    pub renormalizations: usize,
}

/// A failed step together with the statistics up to the failure.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFailure {
    pub step: usize,
    pub error: Error,
    pub stats: RunStats,
}

/// An integration error with the trajectory recorded before it.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationError<D: Domain> {
    pub step: usize,
    pub error: Error,
    pub partial: Trajectory<D>,
}

impl<D: Domain> core::fmt::Display for IntegrationError<D> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "step {}: {}", self.step, self.error)
    }
}

impl<D: Domain> core::error::Error for IntegrationError<D> {}

fn sample<D: Domain, R: Recorder<D> + ?Sized>(
    sys: &VortexSystem<D>,
    t: f64,
    points: &[D::Point],
    rec: &mut R,
) {
    let h = sys.hamiltonian(points).unwrap_or(f64::NAN);
    rec.record(t, points, h, sys.momentum_components(points));
}

/// Integrates `n_steps` steps, streaming samples at `t = 0` and every
/// `record_every` steps into `rec`.
pub fn integrate_with<D: Domain, R: Recorder<D> + ?Sized>(
    sys: &VortexSystem<D>,
    s0: &[D::Point],
    cfg: &IntegratorConfig,
    n_steps: usize,
    rec: &mut R,
) -> core::result::Result<RunStats, StepFailure> {
    let fail = |error, stats| StepFailure { step: 0, error, stats };
    let mut stats = RunStats::default();
    cfg.validate().map_err(|e| fail(e, stats))?;
    sys.check_state(s0).map_err(|e| fail(e, stats))?;
    let pairs = cfg.pair_order.pairs(s0.len()).map_err(|e| fail(e, stats))?;
    let mut x = s0.to_vec();
    sample(sys, 0.0, &x, rec);
    stats.samples = 1;
    for k in 1..=n_steps {
        match step_with_pairs(sys, &mut x, &pairs, cfg.dt, cfg.method) {
            Ok(r) => stats.renormalizations += r,
            Err(error) => return Err(StepFailure { step: k, error, stats }),
        }
        stats.steps = k;
        if k % cfg.record_every == 0 {
            sample(sys, k as f64 * cfg.dt, &x, rec);
            stats.samples += 1;
        }
    }
    Ok(stats)
}

/// Integrates and stores every sample.
pub fn integrate<D: Domain>(
    sys: &VortexSystem<D>,
    s0: &[D::Point],
    cfg: &IntegratorConfig,
    n_steps: usize,
) -> core::result::Result<Trajectory<D>, IntegrationError<D>> {
    let mut traj = Trajectory::default();
    match integrate_with(sys, s0, cfg, n_steps, &mut traj) {
        Ok(stats) => {
            traj.renormalizations = stats.renormalizations;
            Ok(traj)
        }
        Err(f) => {
            traj.renormalizations = f.stats.renormalizations;
            Err(IntegrationError {
                step: f.step,
                error: f.error,
                partial: traj,
            })
        }
    }
}
