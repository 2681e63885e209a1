//! One-dimensional "needle" inequalities, checked by quadrature.
//!
//! Localization reduces the interior-volume bound, the low-temperature
//! expectation bound and log-concavity of the partition function to
//! integrals over an interval against the weight `zⁿ⁻¹` (or an affine
//! function to the power `n − 1`). These checks evaluate both sides.
//!
//! Weights are rescaled by a constant (`(z/b)ⁿ⁻¹` instead of `zⁿ⁻¹`) before
//! integration; every inequality here is homogeneous in the weight, so the
//! comparison is unchanged while the numbers stay O(1).

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by std when it is in the build graph
use num_traits::Float;

use super::{check_positive, DiagnosticError, InequalityReport};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::rng::RngStream;

/// Absolute slack granted to quadrature comparisons.
pub const QUADRATURE_SLACK: f64 = 1e-9;

/// `∫_a^b (c₁x + c₂)ⁿ⁻¹ dx ≥ (b − a)/(ε·n·e) · ∫_b^{b+ε} (c₁x + c₂)ⁿ⁻¹ dx`
/// for affine `c₁x + c₂` positive on `[a, b + ε]` and `ε ≤ (b − a)/n`.
///
/// Reported as `lhs = (b − a)/(εne)·∫_b^{b+ε}`, `rhs = ∫_a^b`, both divided by
/// `max(c₁x + c₂)ⁿ⁻¹` over `[a, b + ε]`. The detail `closed_form_gap` is the
/// largest discrepancy between quadrature and the antiderivative.
pub fn check_affine_needle_lemma(
    a: f64,
    b: f64,
    c1: f64,
    c2: f64,
    n: u32,
    eps: f64,
    spec: &QuadratureSpec,
) -> Result<InequalityReport, DiagnosticError> {
    if n == 0 || !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(DiagnosticError::Precondition(format!("need a < b and n ≥ 1 (a={a}, b={b}, n={n})")));
    }
    check_positive("eps", eps)?;
    let nf = n as f64;
    if eps > (b - a) / nf * (1.0 + 1e-12) {
        return Err(DiagnosticError::Precondition(format!("eps = {eps} exceeds (b − a)/n = {}", (b - a) / nf)));
    }
    let g = |x: f64| c1 * x + c2;
    let (ga, gend) = (g(a), g(b + eps));
    if !(ga > 0.0 && gend > 0.0) {
        return Err(DiagnosticError::Precondition(format!(
            "affine function must be positive on [a, b + eps] (values {ga}, {gend})"
        )));
    }
    let scale = ga.max(gend);
    let w = |x: f64| (g(x) / scale).powi(n as i32 - 1);
    let inner = integrate(w, a, b, &[], spec)?.value;
    let shell = integrate(w, b, b + eps, &[], spec)?.value;
    // Antiderivative of (g/s)ⁿ⁻¹ is (g/s)ⁿ·s/(n·c₁), or x for constant g.
    let exact = |lo: f64, hi: f64| {
        if c1 == 0.0 {
            (hi - lo) * (c2 / scale).powi(n as i32 - 1)
        } else {
            ((g(hi) / scale).powi(n as i32) - (g(lo) / scale).powi(n as i32)) * scale / (nf * c1)
        }
    };
    let gap = (inner - exact(a, b)).abs().max((shell - exact(b, b + eps)).abs());
    let lhs = (b - a) / (eps * nf * core::f64::consts::E) * shell;
    Ok(InequalityReport::new("affine_needle", lhs, inner, 0.0, QUADRATURE_SLACK)
        .with_detail("closed_form_gap", gap)
        .with_detail("weight_scale", scale))
}

/// Convex piecewise-linear function on `[a, b]`: value `v0` at `a`, slope
/// `slopes[i]` between consecutive knots. Slopes are nondecreasing.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexProfile {
    pub a: f64,
    pub b: f64,
    pub v0: f64,
    /// Interior knots, strictly increasing, inside `(a, b)`.
    pub knots: Vec<f64>,
    /// `knots.len() + 1` nondecreasing slopes.
    pub slopes: Vec<f64>,
}

impl ConvexProfile {
    pub fn new(a: f64, b: f64, v0: f64, knots: Vec<f64>, slopes: Vec<f64>) -> Result<Self, DiagnosticError> {
        let ok = a < b
            && slopes.len() == knots.len() + 1
            && knots.windows(2).all(|w| w[0] < w[1])
            && knots.iter().all(|&k| a < k && k < b)
            && slopes.windows(2).all(|w| w[0] <= w[1]);
        if ok {
            Ok(Self { a, b, v0, knots, slopes })
        } else {
            Err(DiagnosticError::Precondition("malformed convex profile".into()))
        }
    }

    /// Random profile with `pieces` linear pieces and slopes in `[−s, s]`.
    pub fn random(rng: &mut RngStream, a: f64, b: f64, pieces: usize, s: f64) -> Self {
        let pieces = pieces.max(1);
        let mut knots: Vec<f64> = (1..pieces).map(|_| a + (b - a) * (0.02 + 0.96 * rng.uniform())).collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let mut slopes: Vec<f64> = (0..=knots.len()).map(|_| s * (2.0 * rng.uniform() - 1.0)).collect();
        slopes.sort_by(f64::total_cmp);
        let v0 = 2.0 * rng.uniform() - 1.0;
        Self { a, b, v0, knots, slopes }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut v = self.v0;
        let mut left = self.a;
        for (i, &k) in self.knots.iter().enumerate() {
            if x <= k {
                return v + self.slopes[i] * (x - left);
            }
            v += self.slopes[i] * (k - left);
            left = k;
        }
        v + self.slopes[self.knots.len()] * (x - left)
    }
}

const CONVEXITY_GRID: usize = 512;

/// Midpoint convexity test on a uniform grid plus the minimum over the grid,
/// the breakpoints and a golden-section refinement.
fn convex_minimum<H: Fn(f64) -> f64>(h: &H, a: f64, b: f64, breakpoints: &[f64]) -> Result<f64, DiagnosticError> {
    let step = (b - a) / CONVEXITY_GRID as f64;
    let vals: Vec<f64> = (0..=CONVEXITY_GRID).map(|i| h(a + step * i as f64)).collect();
    if let Some(bad) = vals.iter().position(|v| !v.is_finite()) {
        return Err(DiagnosticError::Precondition(format!("h is not finite at {}", a + step * bad as f64)));
    }
    for i in 1..CONVEXITY_GRID {
        let chord = 0.5 * (vals[i - 1] + vals[i + 1]);
        if vals[i] > chord + 1e-9 * (1.0 + chord.abs()) {
            return Err(DiagnosticError::NotConvex { at: a + step * i as f64 });
        }
    }
    let mut min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    for &k in breakpoints.iter().filter(|&&k| a <= k && k <= b) {
        min = min.min(h(k));
    }
    let (mut lo, mut hi) = (a, b);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if h(m1) <= h(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    Ok(min.min(h(0.5 * (lo + hi))))
}

fn check_interval(a: f64, b: f64) -> Result<(), DiagnosticError> {
    if 0.0 <= a && a < b && b.is_finite() {
        Ok(())
    } else {
        Err(DiagnosticError::Precondition(format!("need 0 ≤ a < b (a={a}, b={b})")))
    }
}

/// `∫_a^b e^{−h} h zⁿ⁻¹ dz ≤ (n + 1)·∫_a^b e^{−h} zⁿ⁻¹ dz` for convex `h`
/// with minimum zero on `[a, b]`. `h` is shifted by its minimum first; the
/// weight is `(z/b)ⁿ⁻¹`. Known kinks of `h` go in `breakpoints`.
pub fn check_kv_needle_lemma<H: Fn(f64) -> f64>(
    h: H,
    a: f64,
    b: f64,
    n: u32,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<InequalityReport, DiagnosticError> {
    check_interval(a, b)?;
    if n == 0 {
        return Err(DiagnosticError::Precondition("n must be ≥ 1".into()));
    }
    let shift = convex_minimum(&h, a, b, breakpoints)?;
    let w = |z: f64| (z / b).powi(n as i32 - 1);
    let lhs = integrate(
        |z| {
            let v = h(z) - shift;
            (-v).exp() * v * w(z)
        },
        a,
        b,
        breakpoints,
        spec,
    )?
    .value;
    let mass = integrate(|z| (-(h(z) - shift)).exp() * w(z), a, b, breakpoints, spec)?.value;
    Ok(InequalityReport::new("kv_needle", lhs, (n as f64 + 1.0) * mass, 0.0, QUADRATURE_SLACK)
        .with_detail("shift", shift)
        .with_detail("weight_scale", b.powi(n as i32 - 1)))
}

/// Needle form of the log-concavity of `aⁿZ(a)`:
/// `Z(α)·Z(β) ≤ ((α+β)²/(4αβ))ⁿ·Z((α+β)/2)²` with
/// `Z(s) = ∫_c^d e^{−s·h(x)} xⁿ⁻¹ dx`.
///
/// The weight `xⁿ⁻¹` appears in all three integrals; with it, `α = β` is an
/// exact equality.
pub fn check_partition_function_logconcavity<H: Fn(f64) -> f64>(
    h: H,
    c: f64,
    d: f64,
    n: u32,
    alpha: f64,
    beta: f64,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<InequalityReport, DiagnosticError> {
    check_interval(c, d)?;
    check_positive("alpha", alpha)?;
    check_positive("beta", beta)?;
    if n == 0 {
        return Err(DiagnosticError::Precondition("n must be ≥ 1".into()));
    }
    // A constant shift of h multiplies both sides by the same factor.
    let shift = convex_minimum(&h, c, d, breakpoints)?;
    let z = |s: f64| {
        integrate(
            |x| (-s * (h(x) - shift)).exp() * (x / d).powi(n as i32 - 1),
            c,
            d,
            breakpoints,
            spec,
        )
        .map(|q| q.value)
    };
    let mid = 0.5 * (alpha + beta);
    let (za, zb, zm) = (z(alpha)?, z(beta)?, z(mid)?);
    let factor = ((alpha + beta).powi(2) / (4.0 * alpha * beta)).powi(n as i32);
    Ok(InequalityReport::new("z_logconcavity", za * zb, factor * zm * zm, 0.0, QUADRATURE_SLACK)
        .with_detail("z_alpha", za)
        .with_detail("z_beta", zb)
        .with_detail("z_mid", zm)
        .with_detail("factor", factor))
}
