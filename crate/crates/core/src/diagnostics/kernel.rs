//! Transition-kernel diagnostics: one-step total variation between nearby
//! starting points, and the decay of the distance to uniformity along a
//! chain.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by std when it is in the build graph
use num_traits::Float;

use super::{uniform_samples, DiagnosticError, Estimate};
use crate::body::ConvexBody;
use crate::exec::Executor;
use crate::manifold::{Manifold, ManifoldPoint};
use crate::rng::{domain, RngStream};
use crate::stats::{ks_sigma, ks_two_sample, mean_stderr};
use crate::walker::{uniform_step, WalkError, WalkParams, WalkState};

/// `d_TV(P_x, P_y)` for the lazy walk, split into its parts.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OneStepTv {
    pub tv: Estimate,
    /// `½∫_K |q_x − q_y|`, the disagreement of the proposal densities inside K.
    pub continuous: f64,
    /// `½((1 − ℓ(x)) + (1 − ℓ(y)))`, the mass of the two distinct atoms.
    pub rejection: f64,
    pub rejection_x: f64,
    pub rejection_y: f64,
}

/// Estimates the total variation between the one-step kernels at `x` and
/// `y`, using the closed-form proposal densities `q_x`, `q_y`.
///
/// With `x ≠ y` the kernels are `P_x = q_x|_K + (1 − ℓ(x))·δ_x` and the atoms
/// never overlap, so `TV = 1 − ∫_K min(q_x, q_y)`. Proposals are drawn from
/// the mixture `½(q_x + q_y)` and weighted by `2·min/(q_x + q_y)`.
pub fn estimate_one_step_tv(
    x: &ManifoldPoint,
    y: &ManifoldPoint,
    body: &ConvexBody,
    delta: f64,
    mc_proposals: usize,
    rng: &mut RngStream,
) -> Result<OneStepTv, DiagnosticError> {
    super::check_positive("delta", delta)?;
    if mc_proposals == 0 {
        return Err(DiagnosticError::Precondition("mc_proposals must be ≥ 1".into()));
    }
    if !body.contains(x)? || !body.contains(y)? {
        return Err(WalkError::InvalidStart.into());
    }
    let m = body.manifold();
    if m.proposal_log_density(x, x, delta).is_none() {
        return Err(DiagnosticError::Unsupported("proposal density has no closed form on this manifold".into()));
    }
    if x == y {
        let zero = Estimate { value: 0.0, stderr: 0.0 };
        return Ok(OneStepTv {
            tv: zero,
            continuous: 0.0,
            rejection: 0.0,
            rejection_x: 0.0,
            rejection_y: 0.0,
        });
    }
    let mut overlap = Vec::with_capacity(mc_proposals);
    let mut cont = 0.0;
    // Proposals drawn from x (even i) and y (odd i) that leave K.
    let mut out = [0usize; 2];
    for i in 0..mc_proposals {
        let from = if i % 2 == 0 { x } else { y };
        let u = m.sample_tangent_gaussian(from, rng);
        let z = m.exp_map(from, &u.scaled(delta))?;
        if !body.contains(&z)? {
            out[i % 2] += 1;
            overlap.push(0.0);
            continue;
        }
        let lx = m.proposal_log_density(x, &z, delta).unwrap_or(f64::NEG_INFINITY);
        let ly = m.proposal_log_density(y, &z, delta).unwrap_or(f64::NEG_INFINITY);
        // 2·q_x/(q_x + q_y) and 2·q_y/(q_x + q_y), computed from the log ratio.
        let wx = 2.0 / (1.0 + (ly - lx).exp());
        let wy = 2.0 - wx;
        overlap.push(wx.min(wy));
        cont += 0.5 * (wx - wy).abs();
    }
    let total = mc_proposals as f64;
    let est = mean_stderr(&overlap);
    let drawn = [mc_proposals.div_ceil(2), mc_proposals / 2];
    let frac = |k: usize| if drawn[k] == 0 { 0.0 } else { out[k] as f64 / drawn[k] as f64 };
    let (rx, ry) = (frac(0), frac(1));
    Ok(OneStepTv {
        tv: Estimate {
            value: 1.0 - est.mean,
            stderr: est.stderr,
        },
        continuous: cont / total,
        rejection: 0.5 * (rx + ry),
        rejection_x: rx,
        rejection_y: ry,
    })
}

/// Starting law for [`tv_decay_curve`].
#[derive(Clone, Debug, PartialEq)]
pub enum StartLaw {
    PointMass(ManifoldPoint),
    /// Exact uniform samples (a warm start with `H = 1`).
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayPoint {
    pub step: u64,
    pub ks: f64,
    /// Null standard deviation of the KS statistic at these sample sizes.
    pub sigma: f64,
}

/// Runs `replicas` independent chains and, at each checkpoint, computes the
/// two-sample KS distance between the chains' `summary` values and those of
/// `reference_samples` exact uniform draws.
pub fn tv_decay_curve<E: Executor, S: Fn(&ManifoldPoint) -> f64 + Sync>(
    body: &ConvexBody,
    params: &WalkParams,
    start: &StartLaw,
    checkpoints: &[u64],
    replicas: usize,
    reference_samples: usize,
    summary: S,
    executor: &E,
) -> Result<Vec<DecayPoint>, DiagnosticError> {
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DiagnosticError::Precondition("checkpoints must be strictly increasing".into()));
    }
    if replicas == 0 || reference_samples == 0 {
        return Err(DiagnosticError::Precondition("need at least one replica and one reference sample".into()));
    }
    let reference: Vec<f64> = uniform_samples(body, reference_samples, params.seed, domain::REFERENCE, executor)?
        .iter()
        .map(&summary)
        .collect();
    let traces = executor.map(replicas, |r| -> Result<Vec<f64>, DiagnosticError> {
        let mut rng = RngStream::derive(params.seed, domain::CHAIN, r as u64);
        let x0 = match start {
            StartLaw::PointMass(x) => x.clone(),
            StartLaw::Uniform => body.rejection_sample_uniform(&mut rng)?,
        };
        if !body.contains(&x0)? {
            return Err(WalkError::InvalidStart.into());
        }
        let mut state = WalkState::new(x0);
        let mut out = Vec::with_capacity(checkpoints.len());
        for &c in checkpoints {
            while state.step_index < c {
                uniform_step(&mut state, body, params, &mut rng)?;
            }
            out.push(summary(&state.point));
        }
        Ok(out)
    });
    let mut columns = vec![Vec::with_capacity(replicas); checkpoints.len()];
    for t in traces {
        for (col, v) in columns.iter_mut().zip(t?) {
            col.push(v);
        }
    }
    let sigma = ks_sigma(replicas, Some(reference_samples));
    Ok(checkpoints
        .iter()
        .zip(&columns)
        .map(|(&step, col)| DecayPoint {
            step,
            ks: ks_two_sample(col, &reference),
            sigma,
        })
        .collect())
}

/// Whether a curve is nonincreasing up to `k·σ` between consecutive points.
pub fn is_nonincreasing_within(curve: &[DecayPoint], k: f64) -> bool {
    curve.windows(2).all(|w| w[1].ks <= w[0].ks + k * w[1].sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::manifold::{Euclidean, Sphere, SpecialOrthogonal};
    use crate::stats::normal_cdf;

    #[test]
    fn same_point_is_zero() {
        let s = Sphere::new(2);
        let cap = ConvexBody::spherical_cap(s, s.north_pole(), 1.0).unwrap();
        let x = s.north_pole();
        let r = estimate_one_step_tv(&x, &x, &cap, 0.2, 100, &mut RngStream::new(1)).unwrap();
        assert_eq!(r.tv.value, 0.0);
    }

    #[test]
    fn interior_gaussian_shift_matches_closed_form() {
        // Deep inside a large box the kernels are Gaussians N(x, δ²I): TV = 2Φ(s/2δ) − 1.
        let b = ConvexBody::euclidean_box(alloc::vec![-50.0; 3], alloc::vec![50.0; 3]).unwrap();
        let e = Euclidean::new(3);
        let x = e.origin();
        let delta = 0.5;
        for &shift in &[0.05, 0.3, 1.0] {
            let y = ManifoldPoint::new(alloc::vec![shift, 0.0, 0.0]);
            let r = estimate_one_step_tv(&x, &y, &b, delta, 40_000, &mut RngStream::new(2)).unwrap();
            let exact = 2.0 * normal_cdf(shift / (2.0 * delta)) - 1.0;
            assert!((r.tv.value - exact).abs() < 4.0 * r.tv.stderr + 1e-3, "{shift}: {r:?} vs {exact}");
            assert!(r.rejection < 1e-12);
        }
    }

    #[test]
    fn so_n_is_unsupported() {
        let so = SpecialOrthogonal::new(3);
        let body = ConvexBody::geodesic_ball(so, so.identity(), 0.5).unwrap();
        let x = so.identity();
        assert!(matches!(
            estimate_one_step_tv(&x, &x, &body, 0.1, 10, &mut RngStream::new(1)),
            Err(DiagnosticError::Unsupported(_))
        ));
    }

    #[test]
    fn warm_start_curve_is_flat() {
        let s = Sphere::new(2);
        let cap = ConvexBody::spherical_cap(s, s.north_pole(), 1.0).unwrap();
        let axis = s.north_pole();
        let params = WalkParams::new(0.3, 5, 0);
        let curve = tv_decay_curve(
            &cap,
            &params,
            &StartLaw::Uniform,
            &[0, 5, 20],
            2000,
            2000,
            |x| super::super::cap::polar_angle(&axis, x),
            &Sequential,
        )
        .unwrap();
        for p in &curve {
            assert!(p.ks < 5.0 * p.sigma, "{curve:?}");
        }
    }
}
