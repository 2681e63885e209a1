//! Monte Carlo volume checks over exact uniform samples.
//!
//! * Interior volume: the points of `K` whose one-step rejection probability
//!   is not negligible occupy at most a fraction `e·n·ε/r` of `K`.
//! * Isoperimetry: for a partition `K₁ ∪ K₂ ∪ K₃` with `d(K₁, K₃) ≥ ε`,
//!   `(m/(ε ln 2))·Vol(K)·Vol(K₂) ≥ Vol(K₁)·Vol(K₃)` where `m` is the mean
//!   distance from a base point.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by std when it is in the build graph
use num_traits::Float;

use super::{uniform_samples, DiagnosticError, InequalityReport, MC_CHUNKS};
use crate::body::{BodyShape, ConvexBody};
use crate::exec::{chunk_len, Executor};
use crate::manifold::{Manifold, ManifoldPoint};
use crate::rng::{domain, RngStream};
use crate::stats::{binomial_stderr, mean_stderr};
use crate::walker::count_accepted_proposals;

/// How a sample is declared a member of the ε-interior `K₋ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InteriorClassifier {
    /// Local conductance of the walk with `δ = ε/√n`, estimated from
    /// `trials` proposals, is at least `1 − tolerance`.
    LocalConductance { trials: u64, tolerance: f64 },
    /// Exact distance to the boundary is at least ε (needs a closed form).
    BoundaryDistance,
}

impl Default for InteriorClassifier {
    fn default() -> Self {
        Self::LocalConductance {
            trials: 10_000,
            tolerance: 1e-3,
        }
    }
}

/// Estimates the fraction of `K` outside `K₋ε` and compares it with
/// `e·n·ε/r`. Requires `ε ≤ r/n`.
///
/// Details: `bound`, `samples`, and for boxes `exact_shell_ratio`
/// `= 1 − Π(1 − 2ε/wᵢ)`, the exact fraction within ε of a face.
pub fn check_interior_volume<E: Executor>(
    body: &ConvexBody,
    eps: f64,
    mc_samples: usize,
    classifier: InteriorClassifier,
    seed: u64,
    executor: &E,
) -> Result<InequalityReport, DiagnosticError> {
    let meta = body.metadata();
    let n = body.manifold().descriptor().intrinsic_dim as f64;
    if !(eps >= 0.0) || eps > meta.inner_radius / n * (1.0 + 1e-12) {
        return Err(DiagnosticError::Precondition(format!(
            "eps = {eps} must lie in [0, r/n] = [0, {}]",
            meta.inner_radius / n
        )));
    }
    if mc_samples == 0 {
        return Err(DiagnosticError::Precondition("mc_samples must be ≥ 1".into()));
    }
    if classifier == InteriorClassifier::BoundaryDistance && body.boundary_distance(&meta.inner_center).is_none() {
        return Err(DiagnosticError::Unsupported("body has no closed-form boundary distance".into()));
    }
    let delta = eps / n.sqrt();
    let counts = executor.map(MC_CHUNKS, |i| -> Result<u64, DiagnosticError> {
        let mut rng = RngStream::derive(seed, domain::REFERENCE, i as u64);
        let mut walk_rng = RngStream::derive(seed, domain::CONDUCTANCE, i as u64);
        let mut outside = 0;
        for _ in 0..chunk_len(mc_samples as u64, MC_CHUNKS as u64, i as u64) {
            let x = body.rejection_sample_uniform(&mut rng)?;
            let interior = match classifier {
                _ if eps == 0.0 => true,
                InteriorClassifier::BoundaryDistance => body.boundary_distance(&x).unwrap_or(0.0) >= eps,
                InteriorClassifier::LocalConductance { trials, tolerance } => {
                    let allowed = (tolerance * trials as f64).floor() as u64;
                    let (acc, tried) = count_accepted_proposals(&x, body, delta, trials, Some(allowed), &mut walk_rng)?;
                    tried == trials && trials - acc <= allowed
                }
            };
            outside += u64::from(!interior);
        }
        Ok(outside)
    });
    let mut outside = 0;
    for c in counts {
        outside += c?;
    }
    let frac = outside as f64 / mc_samples as f64;
    let bound = core::f64::consts::E * n * eps / meta.inner_radius;
    let mut report = InequalityReport::new("rev_iso", frac, bound, binomial_stderr(frac, mc_samples), 0.0)
        .with_detail("bound", bound)
        .with_detail("samples", mc_samples as f64)
        .with_detail("delta", delta);
    if let BodyShape::EuclideanBox { lo, hi } = body.shape() {
        let inner: f64 = lo.iter().zip(hi).map(|(a, b)| (1.0 - 2.0 * eps / (b - a)).max(0.0)).product();
        report = report.with_detail("exact_shell_ratio", 1.0 - inner);
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    K1,
    K2,
    K3,
}

/// Slab partition by the linear functional `⟨x, w⟩`: `K₁` below `t1`, `K₃`
/// at or above `t2`, `K₂` in between.
pub fn slab_partition(w: Vec<f64>, t1: f64, t2: f64) -> impl Fn(&ManifoldPoint) -> Part + Sync {
    move |x: &ManifoldPoint| {
        let s = crate::manifold::dot(&x.coords, &w);
        if s < t1 {
            Part::K1
        } else if s < t2 {
            Part::K2
        } else {
            Part::K3
        }
    }
}

/// Geodesic distance on the unit sphere between `{⟨x,w⟩ ≤ t1}` and
/// `{⟨x,w⟩ ≥ t2}` for unit `w`.
pub fn sphere_slab_gap(t1: f64, t2: f64) -> f64 {
    t2.clamp(-1.0, 1.0).asin() - t1.clamp(-1.0, 1.0).asin()
}

#[derive(Clone, Debug)]
pub struct IsoperimetryConfig {
    pub eps: f64,
    pub mc_samples: usize,
    /// Base point for `m`; `None` uses the inner center.
    pub base_point: Option<ManifoldPoint>,
    /// Number of `K₁ × K₃` pairs whose distance is spot-checked.
    pub separation_pairs: usize,
}

/// Checks `Vol(K₁)·Vol(K₃) ≤ (m/(ε ln 2))·Vol(K)·Vol(K₂)` with volumes as
/// fractions of `Vol(K)`. The standard error is the delta-method error of
/// `lhs − rhs` from per-sample influence values.
pub fn check_isoperimetry<E: Executor, P: Fn(&ManifoldPoint) -> Part + Sync>(
    body: &ConvexBody,
    partition: P,
    config: &IsoperimetryConfig,
    seed: u64,
    executor: &E,
) -> Result<InequalityReport, DiagnosticError> {
    super::check_positive("eps", config.eps)?;
    if config.mc_samples == 0 {
        return Err(DiagnosticError::Precondition("mc_samples must be ≥ 1".into()));
    }
    let m = body.manifold();
    let base = config.base_point.clone().unwrap_or_else(|| body.metadata().inner_center);
    let xs = uniform_samples(body, config.mc_samples, seed, domain::REFERENCE, executor)?;
    let parts: Vec<Part> = xs.iter().map(&partition).collect();
    let dists = xs.iter().map(|x| m.distance(&base, x)).collect::<Result<Vec<f64>, _>>()?;

    let k1: Vec<&ManifoldPoint> = xs.iter().zip(&parts).filter(|(_, p)| **p == Part::K1).map(|(x, _)| x).collect();
    let k3: Vec<&ManifoldPoint> = xs.iter().zip(&parts).filter(|(_, p)| **p == Part::K3).map(|(x, _)| x).collect();
    let mut min_sep = f64::INFINITY;
    if !k1.is_empty() && !k3.is_empty() {
        for i in 0..config.separation_pairs {
            let x = k1[i % k1.len()];
            let y = k3[(i / k1.len() + i) % k3.len()];
            let d = m.distance(x, y)?;
            min_sep = min_sep.min(d);
            if d < config.eps {
                return Err(DiagnosticError::SeparationViolated { distance: d });
            }
        }
    }

    let total = xs.len() as f64;
    let frac = |p: Part| parts.iter().filter(|&&q| q == p).count() as f64 / total;
    let (p1, p2, p3) = (frac(Part::K1), frac(Part::K2), frac(Part::K3));
    let mean_d = dists.iter().sum::<f64>() / total;
    let c = 1.0 / (config.eps * core::f64::consts::LN_2);
    let influence: Vec<f64> = parts
        .iter()
        .zip(&dists)
        .map(|(p, d)| {
            let ind = |q: Part| if *p == q { 1.0 } else { 0.0 };
            p3 * ind(Part::K1) + p1 * ind(Part::K3) - c * mean_d * ind(Part::K2) - c * p2 * d
        })
        .collect();
    let stderr = mean_stderr(&influence).stderr;
    Ok(InequalityReport::new("isoperimetry", p1 * p3, c * mean_d * p2, stderr, 0.0)
        .with_detail("vol_k1", p1)
        .with_detail("vol_k2", p2)
        .with_detail("vol_k3", p3)
        .with_detail("mean_distance", mean_d)
        .with_detail("min_sampled_separation", min_sep))
}
