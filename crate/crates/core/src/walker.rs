//! The geodesic walk and its Metropolis-adjusted variant.
//!
//! Each step draws one tangent Gaussian `u` at the current point, proposes
//! `y = exp_x(δu)`, and stays put when `y` leaves the body (a lazy step).
//! The Metropolis variant additionally accepts `y` with probability
//! `min(1, exp(−(f(y) − f(x))/T))`.
//!
//! Every step consumes exactly `intrinsic_dim` normal draws plus one uniform
//! draw, whichever branch is taken, so a uniform walk and a Metropolis walk
//! with a constant objective produce identical trajectories from the same seed.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by std when it is in the build graph
use num_traits::Float;

use crate::body::{BodyError, ConvexBody};
use crate::manifold::{Manifold, ManifoldDescriptor, ManifoldError, ManifoldPoint};
use crate::rng::{domain, RngStream};
use crate::target::GibbsTarget;

/// Guards the curvature term when `R = 0` (flat space).
pub const CURVATURE_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum WalkError {
    #[error("start point is not in the body")]
    InvalidStart,
    #[error("objective returned non-finite value {value} at step {step}")]
    Oracle { step: u64, value: f64 },
    #[error("manifold oracle failed at step {step}: {source}")]
    Manifold { step: u64, source: ManifoldError },
    #[error(transparent)]
    Body(#[from] BodyError),
    #[error("step size {delta} exceeds the admissible bound {bound}")]
    DeltaTooLarge { delta: f64, bound: f64 },
    #[error("invalid walk parameter: {0}")]
    InvalidParams(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalkParams {
    pub delta: f64,
    pub seed: u64,
    /// Total number of steps, burn-in included.
    pub max_steps: u64,
    pub record_rejections: bool,
}

impl WalkParams {
    pub fn new(delta: f64, seed: u64, max_steps: u64) -> Self {
        Self {
            delta,
            seed,
            max_steps,
            record_rejections: true,
        }
    }
}

/// Largest step length allowed by the conductance analysis:
/// `min(√(1/(100√n·R)), s·r/(4n√n))`.
pub fn delta_bound(descriptor: &ManifoldDescriptor, inner_radius: f64, s: f64) -> f64 {
    let n = descriptor.intrinsic_dim as f64;
    let r_curv = descriptor.curvature_bound.max(CURVATURE_FLOOR);
    let curvature_term = (1.0 / (100.0 * n.sqrt() * r_curv)).sqrt();
    let radius_term = s * inner_radius / (4.0 * n * n.sqrt());
    curvature_term.min(radius_term)
}

/// Warning emitted when an explicit step size exceeds [`delta_bound`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaWarning {
    pub delta: f64,
    pub bound: f64,
}

/// Checks `delta` against `bound`. Violations are errors unless
/// `allow_override` is set, in which case they produce a warning.
pub fn validate_delta(
    delta: f64,
    bound: f64,
    allow_override: bool,
) -> Result<Option<DeltaWarning>, WalkError> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(WalkError::InvalidParams(format!("delta {delta} must be finite and ≥ 0")));
    }
    if delta <= bound {
        Ok(None)
    } else if allow_override {
        Ok(Some(DeltaWarning { delta, bound }))
    } else {
        Err(WalkError::DeltaTooLarge { delta, bound })
    }
}

/// Heuristic burn-in `⌈10·n²/δ²⌉`.
pub fn default_burn_in(intrinsic_dim: usize, delta: f64) -> u64 {
    let n = intrinsic_dim as f64;
    (10.0 * n * n / (delta * delta)).ceil().min(u64::MAX as f64) as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Moved,
    /// Proposal left the body.
    Outside,
    /// Proposal rejected by the Metropolis filter.
    Filtered,
    /// The membership oracle hit a cut locus; treated as a rejection.
    CutLocus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalkState {
    pub point: ManifoldPoint,
    pub step_index: u64,
    pub rejected_last: bool,
    pub cumulative_rejections: u64,
    pub last_outcome: Option<StepOutcome>,
    /// Cached objective value at `point` for Metropolis steps.
    pub f_value: Option<f64>,
}

impl WalkState {
    pub fn new(point: ManifoldPoint) -> Self {
        Self {
            point,
            step_index: 0,
            rejected_last: false,
            cumulative_rejections: 0,
            last_outcome: None,
            f_value: None,
        }
    }

    fn record(&mut self, outcome: StepOutcome) {
        self.step_index += 1;
        self.rejected_last = outcome != StepOutcome::Moved;
        if self.rejected_last {
            self.cumulative_rejections += 1;
        }
        self.last_outcome = Some(outcome);
    }
}

/// Proposal `exp_x(δu)` and membership, consuming the step's normal draws.
fn propose(
    state: &WalkState,
    body: &ConvexBody,
    delta: f64,
    rng: &mut RngStream,
) -> Result<(ManifoldPoint, Result<bool, ManifoldError>), WalkError> {
    let m = body.manifold();
    let u = m.sample_tangent_gaussian(&state.point, rng);
    let y = m
        .exp_map(&state.point, &u.scaled(delta))
        .map_err(|source| WalkError::Manifold {
            step: state.step_index,
            source,
        })?;
    let inside = body.classify(&y);
    Ok((y, inside))
}

/// One step of the geodesic walk.
pub fn uniform_step(
    state: &mut WalkState,
    body: &ConvexBody,
    params: &WalkParams,
    rng: &mut RngStream,
) -> Result<(), WalkError> {
    let (y, inside) = propose(state, body, params.delta, rng)?;
    let _filter_draw = rng.uniform();
    let outcome = match inside {
        Ok(true) => {
            state.point = y;
            state.f_value = None;
            StepOutcome::Moved
        }
        Ok(false) => StepOutcome::Outside,
        Err(ManifoldError::CutLocus { .. }) => StepOutcome::CutLocus,
        Err(source) => {
            return Err(WalkError::Manifold {
                step: state.step_index,
                source,
            })
        }
    };
    state.record(outcome);
    Ok(())
}

fn eval_f(target: &GibbsTarget, body: &ConvexBody, x: &ManifoldPoint, step: u64) -> Result<f64, WalkError> {
    let v = target
        .objective
        .eval(body.manifold(), x)
        .map_err(|source| WalkError::Manifold { step, source })?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(WalkError::Oracle { step, value: v })
    }
}

/// One step of the Metropolis-adjusted geodesic walk for `π_{f,T}`.
pub fn metropolis_step(
    state: &mut WalkState,
    body: &ConvexBody,
    target: &GibbsTarget,
    params: &WalkParams,
    rng: &mut RngStream,
) -> Result<(), WalkError> {
    if !(target.temperature > 0.0) {
        return Err(WalkError::InvalidParams(format!(
            "temperature {} must be positive",
            target.temperature
        )));
    }
    let fx = match state.f_value {
        Some(v) => v,
        None => {
            let v = eval_f(target, body, &state.point, state.step_index)?;
            state.f_value = Some(v);
            v
        }
    };
    let (y, inside) = propose(state, body, params.delta, rng)?;
    let filter_draw = rng.uniform();
    let outcome = match inside {
        Ok(true) => {
            let fy = eval_f(target, body, &y, state.step_index)?;
            if filter_draw < (-(fy - fx) / target.temperature).exp() {
                state.point = y;
                state.f_value = Some(fy);
                StepOutcome::Moved
            } else {
                StepOutcome::Filtered
            }
        }
        Ok(false) => StepOutcome::Outside,
        Err(ManifoldError::CutLocus { .. }) => StepOutcome::CutLocus,
        Err(source) => {
            return Err(WalkError::Manifold {
                step: state.step_index,
                source,
            })
        }
    };
    state.record(outcome);
    Ok(())
}

/// Step counts by outcome. `outside / steps` estimates the mean rejection
/// probability `1 − ℓ(x)` along the chain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RejectionStats {
    pub steps: u64,
    pub outside: u64,
    pub filtered: u64,
    pub cut_locus: u64,
}

impl RejectionStats {
    pub fn rejections(&self) -> u64 {
        self.outside + self.filtered + self.cut_locus
    }

    pub fn rejection_fraction(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.rejections() as f64 / self.steps as f64
        }
    }

    pub fn outside_fraction(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.outside as f64 / self.steps as f64
        }
    }

    fn count(&mut self, outcome: StepOutcome) {
        self.steps += 1;
        match outcome {
            StepOutcome::Moved => {}
            StepOutcome::Outside => self.outside += 1,
            StepOutcome::Filtered => self.filtered += 1,
            StepOutcome::CutLocus => self.cut_locus += 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainSample {
    pub step: u64,
    pub point: ManifoldPoint,
    pub rejected: bool,
    pub f_value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainOutput {
    pub samples: Vec<ChainSample>,
    pub stats: RejectionStats,
    pub final_state: WalkState,
}

/// Chain options beyond [`WalkParams`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainSchedule {
    pub burn_in: u64,
    /// Emit every `thin`-th post-burn-in state; must be ≥ 1.
    pub thin: u64,
}

/// Runs a chain on the stream derived from `params.seed`.
pub fn run_chain(
    start: ManifoldPoint,
    body: &ConvexBody,
    params: &WalkParams,
    target: Option<&GibbsTarget>,
    schedule: ChainSchedule,
) -> Result<ChainOutput, WalkError> {
    let mut rng = RngStream::derive(params.seed, domain::CHAIN, 0);
    run_chain_with(start, body, params, target, schedule, &mut rng)
}

/// Runs `params.max_steps` steps (burn-in included) and collects the state
/// after every step `s > burn_in` with `(s − burn_in) % thin == 0`.
pub fn run_chain_with(
    start: ManifoldPoint,
    body: &ConvexBody,
    params: &WalkParams,
    target: Option<&GibbsTarget>,
    schedule: ChainSchedule,
    rng: &mut RngStream,
) -> Result<ChainOutput, WalkError> {
    if schedule.thin == 0 {
        return Err(WalkError::InvalidParams("thin must be ≥ 1".into()));
    }
    if !body.contains(&start)? {
        return Err(WalkError::InvalidStart);
    }
    let mut state = WalkState::new(start);
    let mut stats = RejectionStats::default();
    let mut samples = Vec::new();
    for s in 1..=params.max_steps {
        match target {
            Some(t) => metropolis_step(&mut state, body, t, params, rng)?,
            None => uniform_step(&mut state, body, params, rng)?,
        }
        stats.count(state.last_outcome.expect("step records an outcome"));
        if s > schedule.burn_in && (s - schedule.burn_in) % schedule.thin == 0 {
            debug_assert!(body.contains_unchecked(&state.point));
            samples.push(ChainSample {
                step: s,
                point: state.point.clone(),
                rejected: state.rejected_last,
                f_value: state.f_value,
            });
        }
    }
    if !params.record_rejections {
        stats = RejectionStats {
            steps: stats.steps,
            ..RejectionStats::default()
        };
    }
    Ok(ChainOutput {
        samples,
        stats,
        final_state: state,
    })
}

/// Counts proposals from `x` that land in the body, stopping early once more
/// than `max_rejections` have been rejected. Returns `(accepted, tried)`.
pub fn count_accepted_proposals(
    x: &ManifoldPoint,
    body: &ConvexBody,
    delta: f64,
    trials: u64,
    max_rejections: Option<u64>,
    rng: &mut RngStream,
) -> Result<(u64, u64), WalkError> {
    let m = body.manifold();
    let mut accepted = 0;
    for tried in 1..=trials {
        let u = m.sample_tangent_gaussian(x, rng);
        let y = m
            .exp_map(x, &u.scaled(delta))
            .map_err(|source| WalkError::Manifold { step: tried, source })?;
        if body.contains_unchecked(&y) {
            accepted += 1;
        } else if max_rejections.is_some_and(|cap| tried - accepted > cap) {
            return Ok((accepted, tried));
        }
    }
    Ok((accepted, trials))
}

/// Monte Carlo estimate of the local conductance `ℓ(x) = 1 − P_x(x)`.
pub fn estimate_local_conductance(
    x: &ManifoldPoint,
    body: &ConvexBody,
    params: &WalkParams,
    trials: u64,
    rng: &mut RngStream,
) -> Result<f64, WalkError> {
    if trials == 0 {
        return Err(WalkError::InvalidParams("trials must be ≥ 1".into()));
    }
    if !body.contains(x)? {
        return Err(WalkError::InvalidStart);
    }
    let (accepted, tried) = count_accepted_proposals(x, body, params.delta, trials, None, rng)?;
    Ok(accepted as f64 / tried as f64)
}
