//! Objective functions and Gibbs targets `π_{f,T} ∝ e^{−f/T}`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::body::{BodyShape, ConvexBody};
use crate::manifold::{AnyManifold, Manifold, ManifoldError, ManifoldPoint};

pub type ObjectiveFn = Arc<dyn Fn(&ManifoldPoint) -> f64 + Send + Sync>;

/// A geodesically convex function on a body.
#[derive(Clone)]
pub enum Objective {
    /// `d(x, p)`
    DistanceTo(ManifoldPoint),
    /// `d(x, p)²`
    SquaredDistanceTo(ManifoldPoint),
    /// `⟨c, x⟩` on ℝⁿ.
    Linear(Vec<f64>),
    Constant(f64),
    Custom(ObjectiveFn),
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DistanceTo(p) => f.debug_tuple("DistanceTo").field(&p.coords).finish(),
            Self::SquaredDistanceTo(p) => f.debug_tuple("SquaredDistanceTo").field(&p.coords).finish(),
            Self::Linear(c) => f.debug_tuple("Linear").field(c).finish(),
            Self::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Objective {
    pub fn eval(&self, manifold: &AnyManifold, x: &ManifoldPoint) -> Result<f64, ManifoldError> {
        Ok(match self {
            Self::DistanceTo(p) => manifold.distance(p, x)?,
            Self::SquaredDistanceTo(p) => {
                let d = manifold.distance(p, x)?;
                d * d
            }
            Self::Linear(c) => crate::manifold::dot(c, &x.coords),
            Self::Constant(c) => *c,
            Self::Custom(f) => f(x),
        })
    }

    /// Lipschitz constant on `body`: 1 for distance, `2D` for squared
    /// distance, `‖c‖` for linear, 0 for constants. `None` for custom.
    pub fn lipschitz_on(&self, body: &ConvexBody) -> Option<f64> {
        match self {
            Self::DistanceTo(_) => Some(1.0),
            Self::SquaredDistanceTo(_) => Some(2.0 * body.metadata().diameter),
            Self::Linear(c) => Some(crate::manifold::norm(c)),
            Self::Constant(_) => Some(0.0),
            Self::Custom(_) => None,
        }
    }

    /// Exact minimum over `body` when it is known in closed form.
    pub fn analytic_minimum(&self, body: &ConvexBody) -> Option<f64> {
        match self {
            Self::DistanceTo(p) | Self::SquaredDistanceTo(p) => {
                body.contains(p).ok()?.then_some(0.0)
            }
            Self::Linear(c) => match body.shape() {
                BodyShape::EuclideanBox { lo, hi } if lo.len() == c.len() => Some(
                    c.iter()
                        .zip(lo.iter().zip(hi))
                        .map(|(ci, (a, b))| (ci * a).min(ci * b))
                        .sum(),
                ),
                _ => None,
            },
            Self::Constant(c) => Some(*c),
            Self::Custom(_) => None,
        }
    }
}

/// `π_{f,T}` together with the declared Lipschitz constant of `f`.
#[derive(Clone, Debug)]
pub struct GibbsTarget {
    pub objective: Objective,
    pub lipschitz: f64,
    pub temperature: f64,
}

impl GibbsTarget {
    pub fn new(objective: Objective, lipschitz: f64, temperature: f64) -> Self {
        Self {
            objective,
            lipschitz,
            temperature,
        }
    }

    pub fn at_temperature(&self, temperature: f64) -> Self {
        Self {
            temperature,
            ..self.clone()
        }
    }
}
