//! Geodesic random walks on convex subsets of Riemannian manifolds.
//!
//! The crate samples uniformly from geodesically convex bodies on ℝⁿ, the
//! sphere Sⁿ and SO(n) with a lazy geodesic walk, samples Gibbs densities
//! `e^{−f/T}` with a Metropolis filter on top of it, and minimizes convex
//! functions by simulated annealing. A diagnostics module checks the
//! one-dimensional inequalities and Monte Carlo properties behind the
//! walk's guarantees.
//!
//! ```
//! use geowalk_core::prelude::*;
//!
//! let s2 = Sphere::new(2);
//! let cap = ConvexBody::spherical_cap(s2, s2.north_pole(), 1.0).unwrap();
//! let params = WalkParams::new(0.3, 7, 1_000);
//! let start = cap.metadata().inner_center;
//! let out = run_chain(start, &cap, &params, None, ChainSchedule { burn_in: 100, thin: 10 }).unwrap();
//! assert_eq!(out.samples.len(), 90);
//! assert!(out.samples.iter().all(|s| cap.contains(&s.point).unwrap()));
//! ```
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
// Float math goes through `num_traits::Float` (libm). When any crate in the
// build links std, std's inherent float methods take precedence instead.

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod anneal;
pub mod body;
pub mod diagnostics;
pub mod exec;
pub mod linalg;
pub mod manifold;
pub mod quadrature;
pub mod rng;
pub mod stats;
pub mod target;
pub mod walker;

pub mod prelude {
    pub use crate::anneal::{anneal, make_schedule, AnnealConfig, AnnealResult, AnnealSchedule, StepsPerPhase};
    pub use crate::body::{BodyError, BodyShape, ConvexBody};
    pub use crate::exec::{Executor, Sequential};
    pub use crate::manifold::{
        AnyManifold, Euclidean, Manifold, ManifoldError, ManifoldPoint, SpecialOrthogonal, Sphere,
        TangentVector,
    };
    pub use crate::rng::RngStream;
    pub use crate::target::{GibbsTarget, Objective};
    pub use crate::walker::{
        delta_bound, run_chain, ChainSchedule, RejectionStats, WalkError, WalkParams, WalkState,
    };
}
