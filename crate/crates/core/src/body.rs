//! Strongly geodesically convex bodies presented by membership oracles.
//!
//! A [`ConvexBody`] pairs a manifold with a membership test and the
//! declared metadata the samplers need: an inner-ball center and radius `r`
//! and a diameter bound `D`. Built-in shapes compute their own metadata;
//! oracle bodies are trusted.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)] // shadowed by std when it is in the build graph
use num_traits::Float;

use crate::linalg::Mat;
use crate::manifold::{
    norm, AnyManifold, Manifold, ManifoldError, ManifoldKind, ManifoldPoint, SpecialOrthogonal,
    Sphere,
};
use crate::rng::RngStream;

/// Consecutive rejections after which the uniform sampler gives up.
pub const MAX_CONSECUTIVE_REJECTIONS: u64 = 1_000_000;

pub type MembershipFn = Arc<dyn Fn(&ManifoldPoint) -> bool + Send + Sync>;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum BodyError {
    #[error("body requires a {expected:?} manifold")]
    WrongManifold { expected: ManifoldKind },
    #[error("invalid body parameter: {0}")]
    InvalidParameter(String),
    #[error("declared inner center is not a member")]
    CenterNotMember,
    #[error("uniform sampler rejected {attempts} consecutive proposals")]
    AcceptanceTooLow { attempts: u64 },
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
}

#[derive(Clone)]
pub enum BodyShape {
    /// `{x ∈ Sⁿ : ⟨x, axis⟩ ≥ cos θ}`, `θ < π/2`.
    SphericalCap { axis: ManifoldPoint, angle: f64 },
    /// `{x : d(center, x) ≤ ρ}`, ρ below half the injectivity radius.
    GeodesicBall { center: ManifoldPoint, radius: f64 },
    /// Axis-aligned box in ℝⁿ.
    EuclideanBox { lo: Vec<f64>, hi: Vec<f64> },
    /// User-supplied membership oracle with declared metadata.
    Oracle {
        membership: MembershipFn,
        center: ManifoldPoint,
        inner_radius: f64,
        diameter: f64,
    },
}

impl fmt::Debug for BodyShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SphericalCap { axis, angle } => f
                .debug_struct("SphericalCap")
                .field("axis", &axis.coords)
                .field("angle", angle)
                .finish(),
            Self::GeodesicBall { center, radius } => f
                .debug_struct("GeodesicBall")
                .field("center", &center.coords)
                .field("radius", radius)
                .finish(),
            Self::EuclideanBox { lo, hi } => f
                .debug_struct("EuclideanBox")
                .field("lo", lo)
                .field("hi", hi)
                .finish(),
            Self::Oracle {
                center,
                inner_radius,
                diameter,
                ..
            } => f
                .debug_struct("Oracle")
                .field("center", &center.coords)
                .field("inner_radius", inner_radius)
                .field("diameter", diameter)
                .finish_non_exhaustive(),
        }
    }
}

/// Inner-ball center, inner radius `r` and diameter `D`.
#[derive(Clone, Debug, PartialEq)]
pub struct BodyMetadata {
    pub inner_center: ManifoldPoint,
    pub inner_radius: f64,
    pub diameter: f64,
}

#[derive(Clone, Debug)]
pub struct ConvexBody {
    manifold: AnyManifold,
    shape: BodyShape,
}

fn invalid(msg: impl Into<String>) -> BodyError {
    BodyError::InvalidParameter(msg.into())
}

impl ConvexBody {
    pub fn spherical_cap(sphere: Sphere, axis: ManifoldPoint, angle: f64) -> Result<Self, BodyError> {
        sphere.check_point(&axis)?;
        if !(angle > 0.0 && angle < core::f64::consts::FRAC_PI_2) {
            return Err(invalid(format!("cap angle {angle} must lie in (0, π/2)")));
        }
        Ok(Self {
            manifold: sphere.into(),
            shape: BodyShape::SphericalCap { axis, angle },
        })
    }

    pub fn geodesic_ball(
        manifold: impl Into<AnyManifold>,
        center: ManifoldPoint,
        radius: f64,
    ) -> Result<Self, BodyError> {
        let manifold = manifold.into();
        manifold.check_point(&center)?;
        let limit = 0.5 * manifold.descriptor().injectivity_radius;
        if !(radius > 0.0 && radius < limit) {
            return Err(invalid(format!(
                "ball radius {radius} must lie in (0, {limit})"
            )));
        }
        Ok(Self {
            manifold,
            shape: BodyShape::GeodesicBall { center, radius },
        })
    }

    pub fn euclidean_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, BodyError> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(invalid("box corners must be non-empty and of equal length"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(invalid("box requires lo < hi componentwise"));
        }
        Ok(Self {
            manifold: crate::manifold::Euclidean::new(lo.len()).into(),
            shape: BodyShape::EuclideanBox { lo, hi },
        })
    }

    /// Body given only by an oracle. The declared metadata is trusted apart
    /// from the center being a member.
    pub fn from_oracle(
        manifold: impl Into<AnyManifold>,
        membership: MembershipFn,
        center: ManifoldPoint,
        inner_radius: f64,
        diameter: f64,
    ) -> Result<Self, BodyError> {
        let manifold = manifold.into();
        manifold.check_point(&center)?;
        if !(inner_radius > 0.0) || !(diameter >= 2.0 * inner_radius) {
            return Err(invalid("oracle body needs r > 0 and D ≥ 2r"));
        }
        if !membership(&center) {
            return Err(BodyError::CenterNotMember);
        }
        Ok(Self {
            manifold,
            shape: BodyShape::Oracle {
                membership,
                center,
                inner_radius,
                diameter,
            },
        })
    }

    pub fn manifold(&self) -> &AnyManifold {
        &self.manifold
    }

    pub fn shape(&self) -> &BodyShape {
        &self.shape
    }

    /// Membership oracle.
    pub fn contains(&self, x: &ManifoldPoint) -> Result<bool, BodyError> {
        let expected = self.manifold.ambient_dim();
        if x.dim() != expected {
            return Err(ManifoldError::DimensionMismatch {
                expected,
                found: x.dim(),
            }
            .into());
        }
        Ok(self.contains_unchecked(x))
    }

    pub(crate) fn contains_unchecked(&self, x: &ManifoldPoint) -> bool {
        self.classify(x).unwrap_or(false)
    }

    /// Membership, surfacing cut-locus failures of the distance oracle.
    pub(crate) fn classify(&self, x: &ManifoldPoint) -> Result<bool, ManifoldError> {
        Ok(match &self.shape {
            BodyShape::SphericalCap { axis, angle } => {
                crate::manifold::dot(&x.coords, &axis.coords) >= angle.cos()
            }
            BodyShape::GeodesicBall { center, radius } => {
                self.manifold.distance(center, x)? <= *radius
            }
            BodyShape::EuclideanBox { lo, hi } => x
                .coords
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (a, b))| *a <= *v && *v <= *b),
            BodyShape::Oracle { membership, .. } => membership(x),
        })
    }

    pub fn metadata(&self) -> BodyMetadata {
        match &self.shape {
            BodyShape::SphericalCap { axis, angle } => BodyMetadata {
                inner_center: axis.clone(),
                inner_radius: *angle,
                diameter: 2.0 * angle,
            },
            BodyShape::GeodesicBall { center, radius } => BodyMetadata {
                inner_center: center.clone(),
                inner_radius: *radius,
                diameter: 2.0 * radius,
            },
            BodyShape::EuclideanBox { lo, hi } => {
                let center = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
                let r = lo
                    .iter()
                    .zip(hi)
                    .map(|(a, b)| 0.5 * (b - a))
                    .fold(f64::INFINITY, f64::min);
                let diag: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| b - a).collect();
                BodyMetadata {
                    inner_center: ManifoldPoint::new(center),
                    inner_radius: r,
                    diameter: norm(&diag),
                }
            }
            BodyShape::Oracle {
                center,
                inner_radius,
                diameter,
                ..
            } => BodyMetadata {
                inner_center: center.clone(),
                inner_radius: *inner_radius,
                diameter: *diameter,
            },
        }
    }

    /// Distance from a member point to the boundary, when it has a closed form.
    pub fn boundary_distance(&self, x: &ManifoldPoint) -> Option<f64> {
        match &self.shape {
            BodyShape::SphericalCap { axis, angle } => {
                Some(angle - self.manifold.distance(axis, x).ok()?)
            }
            BodyShape::GeodesicBall { center, radius } => {
                Some(radius - self.manifold.distance(center, x).ok()?)
            }
            BodyShape::EuclideanBox { lo, hi } => Some(
                x.coords
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(v, (a, b))| (v - a).min(b - v))
                    .fold(f64::INFINITY, f64::min),
            ),
            BodyShape::Oracle { .. } => None,
        }
    }

    /// Exact uniform sample (Riemannian volume) by global proposal and rejection.
    pub fn rejection_sample_uniform(&self, rng: &mut RngStream) -> Result<ManifoldPoint, BodyError> {
        self.rejection_sample_counted(rng).map(|(x, _)| x)
    }

    /// Like [`ConvexBody::rejection_sample_uniform`] but also returns the
    /// number of proposals used (≥ 1).
    pub fn rejection_sample_counted(
        &self,
        rng: &mut RngStream,
    ) -> Result<(ManifoldPoint, u64), BodyError> {
        if let BodyShape::EuclideanBox { lo, hi } = &self.shape {
            let x = lo.iter().zip(hi).map(|(a, b)| a + (b - a) * rng.uniform()).collect();
            return Ok((ManifoldPoint::new(x), 1));
        }
        for attempt in 1..=MAX_CONSECUTIVE_REJECTIONS {
            let x = self.global_proposal(rng);
            if self.contains_unchecked(&x) {
                return Ok((x, attempt));
            }
        }
        Err(BodyError::AcceptanceTooLow {
            attempts: MAX_CONSECUTIVE_REJECTIONS,
        })
    }

    /// Uniform draw from a region known to contain the body.
    fn global_proposal(&self, rng: &mut RngStream) -> ManifoldPoint {
        match &self.manifold {
            AnyManifold::Sphere(_) => {
                let mut g = vec![0.0; self.manifold.ambient_dim()];
                loop {
                    rng.fill_gaussian(&mut g);
                    if norm(&g) > 1e-12 {
                        break;
                    }
                }
                Sphere::project(&mut g);
                ManifoldPoint::new(g)
            }
            AnyManifold::SpecialOrthogonal(so) => haar_rotation(so, rng),
            AnyManifold::Euclidean(_) => {
                let meta = self.metadata();
                let half = match &self.shape {
                    BodyShape::GeodesicBall { radius, .. } => *radius,
                    _ => meta.diameter,
                };
                ManifoldPoint::new(
                    meta.inner_center
                        .coords
                        .iter()
                        .map(|c| c + half * (2.0 * rng.uniform() - 1.0))
                        .collect(),
                )
            }
        }
    }
}

/// Haar-distributed rotation: Gram–Schmidt on a Gaussian matrix with the
/// sign convention `R_ii > 0`, then a column flip onto det = +1.
fn haar_rotation(so: &SpecialOrthogonal, rng: &mut RngStream) -> ManifoldPoint {
    let n = so.n;
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut c = vec![0.0; n];
            rng.fill_gaussian(&mut c);
            c
        })
        .collect();
    for j in 0..n {
        for k in 0..j {
            let p = crate::manifold::dot(&cols[j], &cols[k]);
            let (head, tail) = cols.split_at_mut(j);
            for (a, b) in tail[0].iter_mut().zip(&head[k]) {
                *a -= p * b;
            }
        }
        let r = norm(&cols[j]);
        cols[j].iter_mut().for_each(|a| *a /= r);
    }
    let mut m = Mat::zeros(n);
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    if m.det() < 0.0 {
        for i in 0..n {
            m[(i, 0)] = -m[(i, 0)];
        }
    }
    ManifoldPoint::new(m.into_vec())
}
