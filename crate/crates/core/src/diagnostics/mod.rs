//! Numerical checks of the inequalities behind the walk's guarantees.
//!
//! * [`needle`] — one-dimensional integral inequalities, by quadrature.
//! * [`volume`] — interior-volume and isoperimetry checks, by Monte Carlo
//!   over exact uniform samples.
//! * [`kernel`] — one-step total variation and mixing curves.
//! * [`gibbs`] — L₂ warmness between temperatures and the low-temperature
//!   expectation bound.
//!
//! Every check returns an [`InequalityReport`] (or an estimate with a
//! standard error); all pass/fail decisions use the same 3σ rule.

use alloc::string::String;
use alloc::vec::Vec;

use crate::body::{BodyError, ConvexBody};
use crate::exec::{chunk_len, Executor};
use crate::manifold::{ManifoldError, ManifoldPoint};
use crate::quadrature::QuadratureError;
use crate::rng::RngStream;
use crate::walker::WalkError;

pub mod cap;
pub mod gibbs;
pub mod kernel;
pub mod needle;
pub mod volume;

/// Outcome of checking `lhs ≤ rhs`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InequalityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub margin: f64,
    /// `lhs ≤ rhs + 3·mc_stderr + abs_tol`.
    pub passed: bool,
    /// Monte Carlo standard error of `lhs − rhs`; 0 for quadrature checks.
    pub mc_stderr: f64,
    pub abs_tol: f64,
    /// Auxiliary quantities (component estimates, exact references, …).
    pub details: Vec<(String, f64)>,
}

impl InequalityReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, mc_stderr: f64, abs_tol: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin: rhs - lhs,
            passed: lhs <= rhs + 3.0 * mc_stderr + abs_tol,
            mc_stderr,
            abs_tol,
            details: Vec::new(),
        }
    }

    pub fn with_detail(mut self, key: impl Into<String>, value: f64) -> Self {
        self.details.push((key.into(), value));
        self
    }

    pub fn detail(&self, key: &str) -> Option<f64> {
        self.details.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

/// Estimate with its Monte Carlo standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DiagnosticError {
    #[error("hypothesis not satisfied: {0}")]
    Precondition(String),
    #[error("function is not convex near {at}")]
    NotConvex { at: f64 },
    #[error("parts closer than the declared separation: found a pair at distance {distance}")]
    SeparationViolated { distance: f64 },
    #[error("2/T_hot − 1/T_cold = {beta_mix} is not positive")]
    ScheduleTooAggressive { beta_mix: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Body(#[from] BodyError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
}

/// Monte Carlo work is split into this many independently seeded chunks,
/// whatever the executor, so results do not depend on the worker count.
pub const MC_CHUNKS: usize = 64;

/// `count` exact uniform samples; chunk `i` uses stream `(seed, domain, i)`.
pub fn uniform_samples<E: Executor>(
    body: &ConvexBody,
    count: usize,
    seed: u64,
    domain: u64,
    executor: &E,
) -> Result<Vec<ManifoldPoint>, BodyError> {
    let chunks = executor.map(MC_CHUNKS, |i| {
        let mut rng = RngStream::derive(seed, domain, i as u64);
        let len = chunk_len(count as u64, MC_CHUNKS as u64, i as u64);
        (0..len).map(|_| body.rejection_sample_uniform(&mut rng)).collect::<Result<Vec<_>, _>>()
    });
    let mut out = Vec::with_capacity(count);
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

pub(crate) fn check_positive(name: &str, v: f64) -> Result<(), DiagnosticError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(DiagnosticError::Precondition(alloc::format!("{name} = {v} must be positive and finite")))
    }
}
