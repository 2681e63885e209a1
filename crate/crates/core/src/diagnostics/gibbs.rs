//! Gibbs-distribution diagnostics: L₂ warmness between two temperatures and
//! the low-temperature expectation bound `E f ≤ T(n+1) + min f`.

use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by std when it is in the build graph
use num_traits::Float;

use super::{uniform_samples, DiagnosticError, Estimate, InequalityReport};
use crate::body::ConvexBody;
use crate::exec::Executor;
use crate::rng::domain;
use crate::stats::{batch_means, mean_stderr};
use crate::target::Objective;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Warmness {
    pub estimate: Estimate,
    /// `Z(β)` estimates (relative to the uniform measure, after shifting f
    /// by its sample minimum) at `1/T_hot`, `1/T_cold` and `2/T_hot − 1/T_cold`.
    pub z_hot: f64,
    pub z_cold: f64,
    pub z_mix: f64,
}

/// `‖π_hot/π_cold‖ = ∫ (dπ_hot/dπ_cold)² dπ_cold
/// = Z(β_cold)·Z(2β_hot − β_cold)/Z(β_hot)²`, with `Z(β) = E_unif e^{−βf}`
/// estimated from one shared set of exact uniform samples.
///
/// Sharing the samples makes the estimator exactly 1 when the temperatures
/// coincide or `f` is constant.
pub fn estimate_l2_warmness<E: Executor>(
    objective: &Objective,
    body: &ConvexBody,
    t_hot: f64,
    t_cold: f64,
    mc_samples: usize,
    seed: u64,
    executor: &E,
) -> Result<Warmness, DiagnosticError> {
    super::check_positive("t_hot", t_hot)?;
    super::check_positive("t_cold", t_cold)?;
    if t_hot < t_cold {
        return Err(DiagnosticError::Precondition("t_hot must be ≥ t_cold".into()));
    }
    if mc_samples == 0 {
        return Err(DiagnosticError::Precondition("mc_samples must be ≥ 1".into()));
    }
    let (b_hot, b_cold) = (1.0 / t_hot, 1.0 / t_cold);
    let b_mix = if t_hot == t_cold { b_hot } else { 2.0 * b_hot - b_cold };
    if !(b_mix > 0.0) {
        return Err(DiagnosticError::ScheduleTooAggressive { beta_mix: b_mix });
    }
    let xs = uniform_samples(body, mc_samples, seed, domain::REFERENCE, executor)?;
    let fs = xs
        .iter()
        .map(|x| objective.eval(body.manifold(), x))
        .collect::<Result<Vec<f64>, _>>()?;
    // The ratio is invariant under shifting f; shift for numerical range.
    let fmin = fs.iter().copied().fold(f64::INFINITY, f64::min);
    let weights = |beta: f64| -> Vec<f64> { fs.iter().map(|f| (-beta * (f - fmin)).exp()).collect() };
    let (wh, wc, wm) = (weights(b_hot), weights(b_cold), weights(b_mix));
    let mean = |w: &[f64]| w.iter().sum::<f64>() / w.len() as f64;
    let (zh, zc, zm) = (mean(&wh), mean(&wc), mean(&wm));
    let value = (zc * zm) / (zh * zh);
    // Delta method on log(value): influence wc/zc + wm/zm − 2·wh/zh.
    let influence: Vec<f64> = (0..fs.len()).map(|i| wc[i] / zc + wm[i] / zm - 2.0 * wh[i] / zh).collect();
    let stderr = value * mean_stderr(&influence).stderr;
    Ok(Warmness {
        estimate: Estimate { value, stderr },
        z_hot: zh,
        z_cold: zc,
        z_mix: zm,
    })
}

/// Upper bound `(β_hot²/((2β_hot − β_cold)·β_cold))ⁿ` implied by the
/// log-concavity of `βⁿZ(β)`.
pub fn warmness_bound(n: usize, t_hot: f64, t_cold: f64) -> f64 {
    let (bh, bc) = (1.0 / t_hot, 1.0 / t_cold);
    (bh * bh / ((2.0 * bh - bc) * bc)).powi(n as i32)
}

/// Compares the mean of `f` along a chain at temperature `T` with
/// `T(n+1) + min f`, using a batch-means standard error.
pub fn check_low_temp_expectation(
    f_values: &[f64],
    temperature: f64,
    n: usize,
    min_f: f64,
    batches: usize,
) -> Result<InequalityReport, DiagnosticError> {
    super::check_positive("temperature", temperature)?;
    if f_values.len() < 2 {
        return Err(DiagnosticError::Precondition("need at least two chain samples".into()));
    }
    let est = batch_means(f_values, batches);
    let rhs = temperature * (n as f64 + 1.0) + min_f;
    Ok(InequalityReport::new("low_temperature_expectation", est.mean, rhs, est.stderr, 0.0)
        .with_detail("samples", f_values.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::manifold::{Euclidean, Sphere};
    use alloc::vec;

    fn cap() -> ConvexBody {
        let s = Sphere::new(3);
        ConvexBody::spherical_cap(s, s.north_pole(), 1.0).unwrap()
    }

    #[test]
    fn identical_temperatures_give_exactly_one() {
        let body = cap();
        let f = Objective::DistanceTo(Sphere::new(3).north_pole());
        let w = estimate_l2_warmness(&f, &body, 0.3, 0.3, 500, 1, &Sequential).unwrap();
        assert_eq!(w.estimate.value, 1.0);
        let c = estimate_l2_warmness(&Objective::Constant(2.0), &body, 1.0, 0.7, 500, 1, &Sequential).unwrap();
        assert_eq!(c.estimate.value, 1.0);
    }

    #[test]
    fn aggressive_pair_is_refused() {
        let body = cap();
        let f = Objective::DistanceTo(Sphere::new(3).north_pole());
        assert!(matches!(
            estimate_l2_warmness(&f, &body, 1.0, 0.5, 10, 1, &Sequential),
            Err(DiagnosticError::ScheduleTooAggressive { .. })
        ));
    }

    #[test]
    fn interval_with_linear_objective_matches_closed_form() {
        // On [0, 1] with f(x) = x: Z(β) = (1 − e^{−β})/β.
        let b = ConvexBody::euclidean_box(vec![0.0], vec![1.0]).unwrap();
        let f = Objective::Linear(vec![1.0]);
        let z = |beta: f64| (1.0 - (-beta).exp()) / beta;
        let (th, tc) = (0.5, 0.4);
        let exact = z(1.0 / tc) * z(2.0 / th - 1.0 / tc) / z(1.0 / th).powi(2);
        let w = estimate_l2_warmness(&f, &b, th, tc, 50_000, 2, &Sequential).unwrap();
        // The estimator shifts by the sample minimum, which cancels exactly.
        assert!((w.estimate.value - exact).abs() < 4.0 * w.estimate.stderr + 1e-4, "{w:?} vs {exact}");
        assert!(w.estimate.value <= warmness_bound(1, th, tc) + 3.0 * w.estimate.stderr);
        let _ = Euclidean::new(1);
    }

    #[test]
    fn constant_objective_expectation() {
        let r = check_low_temp_expectation(&[3.0; 100], 0.1, 2, 3.0, 10).unwrap();
        assert!(r.passed);
        assert!((r.margin - 0.3).abs() < 1e-12);
    }
}
