//! Manifolds accessed through an exponential-map oracle.
//!
//! A [`Manifold`] answers three questions about points given in an ambient
//! embedding: where the geodesic with a given initial velocity lands after
//! unit time, how far apart two points are, and what an isotropic standard
//! Gaussian in a tangent space looks like. Nothing else is needed by the walks.
//!
//! Built-in manifolds:
//!
//! * [`Euclidean`] — ℝⁿ, flat.
//! * [`Sphere`] — the unit sphere Sⁿ ⊂ ℝⁿ⁺¹ with the round metric.
//! * [`SpecialOrthogonal`] — SO(n) ⊂ ℝⁿˣⁿ with the bi-invariant metric
//!   ⟨A, B⟩ = tr(AᵀB), points stored row-major.
//!
//! Every `exp_map` result is re-projected onto the manifold (renormalized on
//! the sphere, polar factor on SO(n)) so that long chains do not drift.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // shadowed by std when it is in the build graph
use num_traits::Float;

use crate::linalg::{self, LogError, Mat};
use crate::rng::RngStream;

/// A point given by its ambient coordinates.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ManifoldPoint {
    pub coords: Vec<f64>,
}

impl ManifoldPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl From<Vec<f64>> for ManifoldPoint {
    fn from(coords: Vec<f64>) -> Self {
        Self { coords }
    }
}

/// Tangent vector in ambient coordinates. The basepoint is whatever point it
/// is passed alongside; it is not stored.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub components: Vec<f64>,
}

impl TangentVector {
    pub fn new(components: Vec<f64>) -> Self {
        Self { components }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            components: vec![0.0; len],
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            components: self.components.iter().map(|c| c * s).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ManifoldKind {
    Euclidean,
    Sphere,
    SpecialOrthogonal,
}

/// Static data about a manifold used by step-size and budget formulas.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ManifoldDescriptor {
    pub kind: ManifoldKind,
    pub intrinsic_dim: usize,
    /// Declared bound on the Frobenius norm of the curvature tensor.
    pub curvature_bound: f64,
    pub injectivity_radius: f64,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ManifoldError {
    #[error("dimension mismatch: expected {expected} coordinates, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("points are on the cut locus (eigenvalue within {gap:e} of -1)")]
    CutLocus { gap: f64 },
    #[error("point violates the manifold constraint by {defect:e}")]
    NotOnManifold { defect: f64 },
    #[error("matrix function failed to converge")]
    Numerical,
}

impl From<LogError> for ManifoldError {
    fn from(e: LogError) -> Self {
        match e {
            LogError::NearNegativeEigenvalue { gap } => Self::CutLocus { gap },
            LogError::NoConvergence => Self::Numerical,
        }
    }
}

/// Exponential-map oracle plus the metric facts the samplers rely on.
pub trait Manifold {
    fn descriptor(&self) -> ManifoldDescriptor;

    /// Length of the coordinate vectors of points and tangent vectors.
    fn ambient_dim(&self) -> usize;

    /// `exp_x(v)`, re-projected onto the manifold.
    fn exp_map(&self, x: &ManifoldPoint, v: &TangentVector) -> Result<ManifoldPoint, ManifoldError>;

    /// Geodesic distance.
    fn distance(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<f64, ManifoldError>;

    /// Standard Gaussian in `T_x M`, isotropic for the Riemannian metric.
    /// Consumes exactly `intrinsic_dim` normal draws.
    fn sample_tangent_gaussian(&self, x: &ManifoldPoint, rng: &mut RngStream) -> TangentVector;

    /// Riemannian norm of `v ∈ T_x M`.
    fn tangent_norm(&self, x: &ManifoldPoint, v: &TangentVector) -> f64;

    /// How far `x` is from satisfying the point constraint.
    fn point_defect(&self, x: &ManifoldPoint) -> f64;

    /// Tolerance used by [`Manifold::check_point`].
    fn point_tolerance(&self) -> f64;

    /// Density, w.r.t. the Riemannian volume, of `exp_x(δu)` with `u` a
    /// tangent standard Gaussian, evaluated at `z`. `None` when no closed form
    /// is known.
    fn proposal_log_density(&self, _x: &ManifoldPoint, _z: &ManifoldPoint, _delta: f64) -> Option<f64> {
        None
    }

    fn intrinsic_dim(&self) -> usize {
        self.descriptor().intrinsic_dim
    }

    fn check_point(&self, x: &ManifoldPoint) -> Result<(), ManifoldError> {
        check_coords(&x.coords, self.ambient_dim())?;
        let defect = self.point_defect(x);
        if defect > self.point_tolerance() {
            return Err(ManifoldError::NotOnManifold { defect });
        }
        Ok(())
    }

    /// `exp_x(t·v)`.
    fn geodesic_point(
        &self,
        x: &ManifoldPoint,
        v: &TangentVector,
        t: f64,
    ) -> Result<ManifoldPoint, ManifoldError> {
        self.exp_map(x, &v.scaled(t))
    }
}

fn check_coords(c: &[f64], expected: usize) -> Result<(), ManifoldError> {
    if c.len() != expected {
        return Err(ManifoldError::DimensionMismatch {
            expected,
            found: c.len(),
        });
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(ManifoldError::NonFinite);
    }
    Ok(())
}

fn check_pair(x: &[f64], v: &[f64], expected: usize) -> Result<(), ManifoldError> {
    check_coords(x, expected)?;
    check_coords(v, expected)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// ℝⁿ with the standard metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Euclidean {
    pub n: usize,
}

impl Euclidean {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn origin(&self) -> ManifoldPoint {
        ManifoldPoint::new(vec![0.0; self.n])
    }
}

impl Manifold for Euclidean {
    fn descriptor(&self) -> ManifoldDescriptor {
        ManifoldDescriptor {
            kind: ManifoldKind::Euclidean,
            intrinsic_dim: self.n,
            curvature_bound: 0.0,
            injectivity_radius: f64::INFINITY,
        }
    }

    fn ambient_dim(&self) -> usize {
        self.n
    }

    fn exp_map(&self, x: &ManifoldPoint, v: &TangentVector) -> Result<ManifoldPoint, ManifoldError> {
        check_pair(&x.coords, &v.components, self.n)?;
        Ok(ManifoldPoint::new(
            x.coords.iter().zip(&v.components).map(|(a, b)| a + b).collect(),
        ))
    }

    fn distance(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<f64, ManifoldError> {
        check_pair(&x.coords, &y.coords, self.n)?;
        Ok(x.coords
            .iter()
            .zip(&y.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    fn sample_tangent_gaussian(&self, _x: &ManifoldPoint, rng: &mut RngStream) -> TangentVector {
        let mut c = vec![0.0; self.n];
        rng.fill_gaussian(&mut c);
        TangentVector::new(c)
    }

    fn tangent_norm(&self, _x: &ManifoldPoint, v: &TangentVector) -> f64 {
        norm(&v.components)
    }

    fn point_defect(&self, _x: &ManifoldPoint) -> f64 {
        0.0
    }

    fn point_tolerance(&self) -> f64 {
        0.0
    }

    fn proposal_log_density(&self, x: &ManifoldPoint, z: &ManifoldPoint, delta: f64) -> Option<f64> {
        let d2: f64 = x.coords.iter().zip(&z.coords).map(|(a, b)| (a - b) * (a - b)).sum();
        let n = self.n as f64;
        Some(-0.5 * n * (2.0 * PI).ln() - n * delta.ln() - d2 / (2.0 * delta * delta))
    }
}

/// The unit sphere Sⁿ embedded in ℝⁿ⁺¹.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sphere {
    pub n: usize,
    pub curvature_bound: f64,
}

impl Sphere {
    /// Sectional curvature is 1, so `R = n` is declared.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            curvature_bound: n as f64,
        }
    }

    pub fn with_curvature_bound(mut self, r: f64) -> Self {
        self.curvature_bound = r;
        self
    }

    /// `(0, …, 0, 1)`
    pub fn north_pole(&self) -> ManifoldPoint {
        let mut c = vec![0.0; self.n + 1];
        c[self.n] = 1.0;
        ManifoldPoint::new(c)
    }

    /// Renormalizes ambient coordinates.
    pub fn project(coords: &mut [f64]) {
        let r = norm(coords);
        if r > 0.0 {
            coords.iter_mut().for_each(|c| *c /= r);
        }
    }
}

/// `sin t / t`
fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        let t2 = t * t;
        1.0 - t2 / 6.0 + t2 * t2 / 120.0
    } else {
        t.sin() / t
    }
}

impl Manifold for Sphere {
    fn descriptor(&self) -> ManifoldDescriptor {
        ManifoldDescriptor {
            kind: ManifoldKind::Sphere,
            intrinsic_dim: self.n,
            curvature_bound: self.curvature_bound,
            injectivity_radius: PI,
        }
    }

    fn ambient_dim(&self) -> usize {
        self.n + 1
    }

    fn exp_map(&self, x: &ManifoldPoint, v: &TangentVector) -> Result<ManifoldPoint, ManifoldError> {
        check_pair(&x.coords, &v.components, self.n + 1)?;
        let t = norm(&v.components);
        if t == 0.0 {
            return Ok(x.clone());
        }
        let (c, s) = (t.cos(), sinc(t));
        let mut y: Vec<f64> = x
            .coords
            .iter()
            .zip(&v.components)
            .map(|(a, b)| c * a + s * b)
            .collect();
        Sphere::project(&mut y);
        Ok(ManifoldPoint::new(y))
    }

    /// `2·atan2(‖x − y‖, ‖x + y‖)`, which equals `arccos⟨x, y⟩` and stays
    /// accurate near 0 and π.
    fn distance(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<f64, ManifoldError> {
        check_pair(&x.coords, &y.coords, self.n + 1)?;
        let (mut dm, mut dp) = (0.0, 0.0);
        for (a, b) in x.coords.iter().zip(&y.coords) {
            dm += (a - b) * (a - b);
            dp += (a + b) * (a + b);
        }
        Ok(2.0 * dm.sqrt().atan2(dp.sqrt()))
    }

    /// Maps `n` standard normals into `x^⊥` through the Householder reflection
    /// that sends the last basis vector to `±x`.
    fn sample_tangent_gaussian(&self, x: &ManifoldPoint, rng: &mut RngStream) -> TangentVector {
        let m = self.n + 1;
        let mut g = vec![0.0; m];
        rng.fill_gaussian(&mut g[..self.n]);
        let sign = if x.coords[self.n] >= 0.0 { 1.0 } else { -1.0 };
        let mut w = x.coords.clone();
        w[self.n] += sign;
        let ww = dot(&w, &w);
        let wg = dot(&w, &g);
        let f = 2.0 * wg / ww;
        for (gi, wi) in g.iter_mut().zip(&w) {
            *gi -= f * wi;
        }
        // Clean up round-off in the normal direction.
        let r = dot(&g, &x.coords);
        for (gi, xi) in g.iter_mut().zip(&x.coords) {
            *gi -= r * xi;
        }
        TangentVector::new(g)
    }

    fn tangent_norm(&self, _x: &ManifoldPoint, v: &TangentVector) -> f64 {
        norm(&v.components)
    }

    fn point_defect(&self, x: &ManifoldPoint) -> f64 {
        (norm(&x.coords) - 1.0).abs()
    }

    fn point_tolerance(&self) -> f64 {
        1e-9
    }

    /// The pushforward of `N(0, δ²I)` under `exp_x` has, at a point at
    /// distance ρ, one preimage for each geodesic length `t ∈ {ρ + 2πk,
    /// 2π(k+1) − ρ}`, each contributing `φ_δ(t) / |sin t / t|^{n−1}`.
    fn proposal_log_density(&self, x: &ManifoldPoint, z: &ManifoldPoint, delta: f64) -> Option<f64> {
        let rho = self.distance(x, z).ok()?;
        let n = self.n as f64;
        let mut lengths = Vec::with_capacity(8);
        let cutoff = rho + 40.0 * delta;
        let mut k = 0.0;
        loop {
            let a = rho + 2.0 * PI * k;
            let b = 2.0 * PI * (k + 1.0) - rho;
            if a > cutoff && k > 0.0 {
                break;
            }
            lengths.push(a);
            if b <= cutoff {
                lengths.push(b);
            }
            k += 1.0;
        }
        let logs: Vec<f64> = lengths
            .iter()
            .map(|&t| -t * t / (2.0 * delta * delta) - (n - 1.0) * sinc(t).abs().ln())
            .collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln();
        Some(-0.5 * n * (2.0 * PI).ln() - n * delta.ln() + lse)
    }
}

/// SO(n) with the metric ⟨A, B⟩ = tr(AᵀB).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpecialOrthogonal {
    pub n: usize,
    pub curvature_bound: f64,
    pub injectivity_radius: f64,
}

impl SpecialOrthogonal {
    /// Defaults: `R` = intrinsic dimension, injectivity radius π. Under this
    /// metric a rotation by angle φ in one plane has length φ√2, so π is a
    /// conservative radius.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            curvature_bound: (n * n.saturating_sub(1) / 2) as f64,
            injectivity_radius: PI,
        }
    }

    pub fn with_curvature_bound(mut self, r: f64) -> Self {
        self.curvature_bound = r;
        self
    }

    pub fn with_injectivity_radius(mut self, r: f64) -> Self {
        self.injectivity_radius = r;
        self
    }

    pub fn identity(&self) -> ManifoldPoint {
        ManifoldPoint::new(Mat::identity(self.n).into_vec())
    }

    fn mat(&self, c: &[f64]) -> Mat {
        Mat::from_row_major(self.n, c.to_vec()).expect("length checked by caller")
    }

    /// Skew-symmetric generator for coefficients in the orthonormal basis
    /// `(E_ij − E_ji)/√2`, `i < j`.
    pub fn skew_from_coefficients(&self, coeffs: &[f64]) -> Mat {
        let n = self.n;
        let mut omega = Mat::zeros(n);
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                let c = coeffs[k] * core::f64::consts::FRAC_1_SQRT_2;
                omega[(i, j)] = c;
                omega[(j, i)] = -c;
                k += 1;
            }
        }
        omega
    }
}

impl Manifold for SpecialOrthogonal {
    fn descriptor(&self) -> ManifoldDescriptor {
        ManifoldDescriptor {
            kind: ManifoldKind::SpecialOrthogonal,
            intrinsic_dim: self.n * self.n.saturating_sub(1) / 2,
            curvature_bound: self.curvature_bound,
            injectivity_radius: self.injectivity_radius,
        }
    }

    fn ambient_dim(&self) -> usize {
        self.n * self.n
    }

    /// `X · expm(Xᵀ V)`; the generator is skew-symmetrized before exponentiation.
    fn exp_map(&self, x: &ManifoldPoint, v: &TangentVector) -> Result<ManifoldPoint, ManifoldError> {
        check_pair(&x.coords, &v.components, self.n * self.n)?;
        if v.components.iter().all(|&c| c == 0.0) {
            return Ok(x.clone());
        }
        let xm = self.mat(&x.coords);
        let omega = xm.tr_matmul(&self.mat(&v.components)).skew_part();
        let y = linalg::nearest_orthogonal(&xm.matmul(&linalg::expm(&omega)));
        Ok(ManifoldPoint::new(y.into_vec()))
    }

    /// `‖log(XᵀY)‖_F` with the principal logarithm.
    fn distance(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<f64, ManifoldError> {
        check_pair(&x.coords, &y.coords, self.n * self.n)?;
        if x.coords == y.coords {
            return Ok(0.0);
        }
        let rel = self.mat(&x.coords).tr_matmul(&self.mat(&y.coords));
        Ok(linalg::logm_orthogonal(&rel)?.norm_fro())
    }

    fn sample_tangent_gaussian(&self, x: &ManifoldPoint, rng: &mut RngStream) -> TangentVector {
        let mut g = vec![0.0; self.descriptor().intrinsic_dim];
        rng.fill_gaussian(&mut g);
        let omega = self.skew_from_coefficients(&g);
        TangentVector::new(self.mat(&x.coords).matmul(&omega).into_vec())
    }

    fn tangent_norm(&self, _x: &ManifoldPoint, v: &TangentVector) -> f64 {
        norm(&v.components)
    }

    fn point_defect(&self, x: &ManifoldPoint) -> f64 {
        let m = self.mat(&x.coords);
        let d = m.orthogonality_defect();
        if m.det() > 0.0 {
            d
        } else {
            d.max(1.0)
        }
    }

    fn point_tolerance(&self) -> f64 {
        1e-8
    }
}

/// Runtime choice among the built-in manifolds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AnyManifold {
    Euclidean(Euclidean),
    Sphere(Sphere),
    SpecialOrthogonal(SpecialOrthogonal),
}

impl From<Euclidean> for AnyManifold {
    fn from(m: Euclidean) -> Self {
        Self::Euclidean(m)
    }
}

impl From<Sphere> for AnyManifold {
    fn from(m: Sphere) -> Self {
        Self::Sphere(m)
    }
}

impl From<SpecialOrthogonal> for AnyManifold {
    fn from(m: SpecialOrthogonal) -> Self {
        Self::SpecialOrthogonal(m)
    }
}

macro_rules! dispatch {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            AnyManifold::Euclidean($m) => $e,
            AnyManifold::Sphere($m) => $e,
            AnyManifold::SpecialOrthogonal($m) => $e,
        }
    };
}

impl Manifold for AnyManifold {
    fn descriptor(&self) -> ManifoldDescriptor {
        dispatch!(self, m => m.descriptor())
    }

    fn ambient_dim(&self) -> usize {
        dispatch!(self, m => m.ambient_dim())
    }

    fn exp_map(&self, x: &ManifoldPoint, v: &TangentVector) -> Result<ManifoldPoint, ManifoldError> {
        dispatch!(self, m => m.exp_map(x, v))
    }

    fn distance(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<f64, ManifoldError> {
        dispatch!(self, m => m.distance(x, y))
    }

    fn sample_tangent_gaussian(&self, x: &ManifoldPoint, rng: &mut RngStream) -> TangentVector {
        dispatch!(self, m => m.sample_tangent_gaussian(x, rng))
    }

    fn tangent_norm(&self, x: &ManifoldPoint, v: &TangentVector) -> f64 {
        dispatch!(self, m => m.tangent_norm(x, v))
    }

    fn point_defect(&self, x: &ManifoldPoint) -> f64 {
        dispatch!(self, m => m.point_defect(x))
    }

    fn point_tolerance(&self) -> f64 {
        dispatch!(self, m => m.point_tolerance())
    }

    fn proposal_log_density(&self, x: &ManifoldPoint, z: &ManifoldPoint, delta: f64) -> Option<f64> {
        dispatch!(self, m => m.proposal_log_density(x, z, delta))
    }
}
