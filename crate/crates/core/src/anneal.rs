//! Simulated annealing with the Metropolis geodesic walk.
//!
//! The temperature is cooled geometrically, `T_{i+1} = (1 − 1/√n)·T_i`, from
//! `T₀ = L·D` down to `ε·δ_fail/(n+1)`, at which point a Gibbs sample has
//! expected excess `≤ ε·δ_fail` and Markov's inequality gives an ε-minimizer
//! with probability `1 − δ_fail`. Each phase starts where the previous one
//! ended.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by std when it is in the build graph
use num_traits::Float;

use crate::body::{BodyError, ConvexBody};
use crate::exec::Executor;
use crate::manifold::{Manifold, ManifoldDescriptor, ManifoldPoint};
use crate::rng::{domain, RngStream};
use crate::target::{GibbsTarget, Objective};
use crate::walker::{delta_bound, metropolis_step, StepOutcome, WalkError, WalkParams, WalkState};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AnnealSchedule {
    pub t0: f64,
    /// Intrinsic dimension.
    pub n: usize,
    /// Number of cooling rounds `I`; `temps` has `I + 1` entries.
    pub phases: usize,
    pub temps: Vec<f64>,
}

impl AnnealSchedule {
    pub fn ratio(&self) -> f64 {
        cooling_ratio(self.n)
    }

    pub fn final_temperature(&self) -> f64 {
        *self.temps.last().expect("schedule has at least one temperature")
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum AnnealError {
    #[error("invalid annealing parameter: {0}")]
    InvalidParameter(String),
    /// The start temperature is already below the target; the single-phase
    /// schedule `[t0]` is attached.
    #[error("initial temperature is below the final target")]
    DegenerateSchedule { schedule: AnnealSchedule },
    #[error("objective has no known Lipschitz constant; set it explicitly")]
    MissingLipschitz,
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Body(#[from] BodyError),
}

/// `1 − 1/√n`.
pub fn cooling_ratio(n: usize) -> f64 {
    1.0 - 1.0 / (n as f64).sqrt()
}

/// `ε·δ_fail/(n+1)`.
pub fn target_temperature(n: usize, epsilon: f64, fail_prob: f64) -> f64 {
    epsilon * fail_prob / (n as f64 + 1.0)
}

/// Geometric schedule with `I = ⌈√n·ln(t0(n+1)/(ε·δ_fail))⌉` cooling rounds.
pub fn make_schedule(t0: f64, n: usize, epsilon: f64, fail_prob: f64) -> Result<AnnealSchedule, AnnealError> {
    if n < 2 {
        return Err(AnnealError::InvalidParameter(format!("dimension {n} must be ≥ 2")));
    }
    if !(t0 > 0.0 && t0.is_finite()) || !(epsilon > 0.0) || !(fail_prob > 0.0 && fail_prob < 1.0) {
        return Err(AnnealError::InvalidParameter(format!(
            "need t0 > 0, ε > 0, 0 < δ_fail < 1 (got {t0}, {epsilon}, {fail_prob})"
        )));
    }
    let target = target_temperature(n, epsilon, fail_prob);
    let single = AnnealSchedule {
        t0,
        n,
        phases: 0,
        temps: alloc::vec![t0],
    };
    let ratio = t0 / target;
    if ratio < 1.0 {
        return Err(AnnealError::DegenerateSchedule { schedule: single });
    }
    if ratio <= 1.0 + 1e-12 {
        return Ok(single);
    }
    let phases = ((n as f64).sqrt() * ratio.ln()).ceil() as usize;
    let q = cooling_ratio(n);
    let mut temps = Vec::with_capacity(phases + 1);
    let mut t = t0;
    temps.push(t);
    for _ in 0..phases {
        t *= q;
        temps.push(t);
    }
    Ok(AnnealSchedule { t0, n, phases, temps })
}

/// `T₀ = L·D`: the spread of `f` over the body is at most this.
pub fn initial_temperature(body: &ConvexBody, lipschitz: f64) -> f64 {
    lipschitz * body.metadata().diameter
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum StepsPerPhase {
    Auto,
    Fixed(u64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnealConfig {
    pub epsilon: f64,
    pub fail_prob: f64,
    pub steps_per_phase: StepsPerPhase,
    /// `None` takes the objective's own constant.
    pub lipschitz: Option<f64>,
    /// Multiplier for the automatic per-phase budget.
    pub budget_constant: f64,
    /// Cap on the total number of steps across all phases.
    pub global_budget: u64,
    /// `None` uses `delta_bound(·, s = 0.5)`.
    pub delta: Option<f64>,
    /// `None` uses `L·D`.
    pub t0: Option<f64>,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            fail_prob: 0.1,
            steps_per_phase: StepsPerPhase::Auto,
            lipschitz: None,
            budget_constant: 1.0,
            global_budget: 1_000_000,
            delta: None,
            t0: None,
        }
    }
}

/// `C·D²·n³·(1+R)·L²/(r²·T²)·ln(1/δ_fail)`, rounded up and capped at
/// `max_steps`. The flag reports whether the cap was hit.
pub fn phase_step_budget(
    descriptor: &ManifoldDescriptor,
    inner_radius: f64,
    diameter: f64,
    temperature: f64,
    lipschitz: f64,
    budget_constant: f64,
    fail_prob: f64,
    max_steps: u64,
) -> (u64, bool) {
    let n = descriptor.intrinsic_dim as f64;
    let raw = budget_constant * diameter.powi(2) * n.powi(3) * (1.0 + descriptor.curvature_bound) * lipschitz.powi(2)
        / (inner_radius.powi(2) * temperature.powi(2))
        * (1.0 / fail_prob).ln();
    if !raw.is_finite() || raw > max_steps as f64 {
        (max_steps, true)
    } else {
        ((raw.ceil() as u64).max(1), false)
    }
}

/// One row of the annealing trace.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhaseRecord {
    pub phase: usize,
    pub temperature: f64,
    pub steps: u64,
    pub rejections: u64,
    /// Smallest `f` seen so far in the run (the running-minimum offset).
    pub best_f: f64,
    pub final_f: f64,
    pub budget_capped: bool,
    pub start: ManifoldPoint,
    pub end: ManifoldPoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnealResult {
    pub minimizer: ManifoldPoint,
    pub value: f64,
    pub schedule: AnnealSchedule,
    pub delta: f64,
    pub trace: Vec<PhaseRecord>,
}

/// Runs simulated annealing. The start is `start` if given, else a uniform
/// sample from the body. Returns the best point of the final phase.
pub fn anneal(
    body: &ConvexBody,
    objective: &Objective,
    config: &AnnealConfig,
    start: Option<ManifoldPoint>,
    rng: &mut RngStream,
) -> Result<AnnealResult, AnnealError> {
    let lipschitz = config
        .lipschitz
        .or_else(|| objective.lipschitz_on(body))
        .ok_or(AnnealError::MissingLipschitz)?;
    let descriptor = body.manifold().descriptor();
    let meta = body.metadata();
    let n = descriptor.intrinsic_dim;
    let t0 = config.t0.unwrap_or_else(|| initial_temperature(body, lipschitz));
    // A constant objective has L = 0 and nothing to cool.
    let schedule = if t0 > 0.0 {
        make_schedule(t0, n, config.epsilon, config.fail_prob)?
    } else {
        AnnealSchedule {
            t0,
            n,
            phases: 0,
            temps: alloc::vec![target_temperature(n, config.epsilon, config.fail_prob)],
        }
    };
    let delta = config
        .delta
        .unwrap_or_else(|| delta_bound(&descriptor, meta.inner_radius, 0.5));
    let cap = (config.global_budget / schedule.temps.len() as u64).max(1);
    let start = match start {
        Some(x) => x,
        None => body.rejection_sample_uniform(rng)?,
    };
    if !body.contains(&start)? {
        return Err(WalkError::InvalidStart.into());
    }
    let params = WalkParams::new(delta, 0, 0);
    let mut state = WalkState::new(start);
    let f0 = objective.eval(body.manifold(), &state.point).map_err(|source| WalkError::Manifold { step: 0, source })?;
    let mut best_f = f0;
    let mut best_final = (state.point.clone(), f0);
    let mut trace = Vec::with_capacity(schedule.temps.len());
    let last = schedule.temps.len() - 1;
    for (phase, &temperature) in schedule.temps.iter().enumerate() {
        let (steps, capped) = match config.steps_per_phase {
            StepsPerPhase::Fixed(s) => (s, false),
            StepsPerPhase::Auto => phase_step_budget(
                &descriptor,
                meta.inner_radius,
                meta.diameter,
                temperature,
                lipschitz,
                config.budget_constant,
                config.fail_prob,
                cap,
            ),
        };
        let target = GibbsTarget::new(objective.clone(), lipschitz, temperature);
        let phase_start = state.point.clone();
        let rejections_before = state.cumulative_rejections;
        if phase == last {
            let f = state.f_value.unwrap_or(f0);
            best_final = (state.point.clone(), f);
        }
        for _ in 0..steps {
            metropolis_step(&mut state, body, &target, &params, rng)?;
            let f = state.f_value.expect("metropolis step caches f");
            if state.last_outcome == Some(StepOutcome::Moved) {
                best_f = best_f.min(f);
                if phase == last && f < best_final.1 {
                    best_final = (state.point.clone(), f);
                }
            }
        }
        let final_f = match state.f_value {
            Some(f) => f,
            None => objective
                .eval(body.manifold(), &state.point)
                .map_err(|source| WalkError::Manifold { step: state.step_index, source })?,
        };
        trace.push(PhaseRecord {
            phase,
            temperature,
            steps,
            rejections: state.cumulative_rejections - rejections_before,
            best_f,
            final_f,
            budget_capped: capped,
            start: phase_start,
            end: state.point.clone(),
        });
    }
    Ok(AnnealResult {
        minimizer: best_final.0,
        value: best_final.1,
        schedule,
        delta,
        trace,
    })
}

/// Independent annealing trials on streams derived from `(seed, trial)`.
pub fn anneal_trials<E: Executor>(
    body: &ConvexBody,
    objective: &Objective,
    config: &AnnealConfig,
    seed: u64,
    trials: usize,
    executor: &E,
) -> Vec<Result<AnnealResult, AnnealError>> {
    executor.map(trials, |i| {
        let mut rng = RngStream::derive(seed, domain::TRIAL, i as u64);
        anneal(body, objective, config, None, &mut rng)
    })
}
