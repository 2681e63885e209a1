//! Parsers for the descriptor strings used in config files.

use std::f64::consts::PI;

use geowalk_core::body::ConvexBody;
use geowalk_core::manifold::{AnyManifold, Euclidean, Manifold, ManifoldPoint, SpecialOrthogonal, Sphere};
use geowalk_core::target::Objective;

use crate::Error;

fn bad(field: &str, value: &str, why: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: invalid value {value:?}: {why}"))
}

/// `"euclidean:<n>"`, `"sphere:<n>"` or `"so:<n>"`, with optional overrides
/// of the declared curvature bound and injectivity radius.
pub fn parse_manifold(spec: &str, curvature: Option<f64>, injectivity: Option<f64>) -> Result<AnyManifold, Error> {
    let field = "manifold";
    let (kind, dim) = spec
        .split_once(':')
        .ok_or_else(|| bad(field, spec, "expected <kind>:<n>"))?;
    let n: i64 = dim.trim().parse().map_err(|e| bad(field, spec, e))?;
    if n < 1 {
        return Err(bad(field, spec, "dimension must be ≥ 1"));
    }
    let n = n as usize;
    if let Some(r) = curvature {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(bad("curvature_bound", &r.to_string(), "must be finite and ≥ 0"));
        }
    }
    if let Some(r) = injectivity {
        if !(r > 0.0) {
            return Err(bad("injectivity_radius", &r.to_string(), "must be > 0"));
        }
    }
    let m: AnyManifold = match kind.trim() {
        "euclidean" => {
            if curvature.is_some_and(|r| r != 0.0) || injectivity.is_some() {
                return Err(bad(field, spec, "euclidean space is flat with infinite injectivity radius"));
            }
            Euclidean::new(n).into()
        }
        "sphere" => {
            if injectivity.is_some() {
                return Err(bad("injectivity_radius", spec, "fixed at π for spheres"));
            }
            let s = Sphere::new(n);
            curvature.map_or(s, |r| s.with_curvature_bound(r)).into()
        }
        "so" => {
            if n < 2 {
                return Err(bad(field, spec, "SO(n) needs n ≥ 2"));
            }
            let mut g = SpecialOrthogonal::new(n);
            if let Some(r) = curvature {
                g = g.with_curvature_bound(r);
            }
            if let Some(r) = injectivity {
                g = g.with_injectivity_radius(r);
            }
            g.into()
        }
        other => return Err(bad(field, spec, format!("unknown manifold kind {other:?}"))),
    };
    Ok(m)
}

fn parse_list(field: &str, s: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|t| {
            let v: f64 = t.trim().parse().map_err(|e| bad(field, s, e))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(bad(field, s, "non-finite number"))
            }
        })
        .collect()
}

fn parse_scalar(field: &str, s: &str) -> Result<f64, Error> {
    match s.trim() {
        "pi" => Ok(PI),
        t => t.parse().map_err(|e| bad(field, s, e)),
    }
}

/// Named point or comma-separated coordinates. `"north"` is the pole
/// `e_{n+1}` of Sⁿ, `"identity"` the identity of SO(n), `"origin"` the origin
/// of ℝⁿ. `center` resolves `"center"` when a body is known.
pub fn parse_point(
    field: &str,
    spec: &str,
    manifold: &AnyManifold,
    center: Option<&ManifoldPoint>,
) -> Result<ManifoldPoint, Error> {
    let p = match (spec.trim(), manifold) {
        ("north", AnyManifold::Sphere(s)) => s.north_pole(),
        ("identity", AnyManifold::SpecialOrthogonal(g)) => g.identity(),
        ("origin", AnyManifold::Euclidean(e)) => e.origin(),
        ("center", _) => center
            .cloned()
            .ok_or_else(|| bad(field, spec, "\"center\" needs a body"))?,
        (s, _) => ManifoldPoint::new(parse_list(field, s)?),
    };
    manifold.check_point(&p).map_err(|e| bad(field, spec, e))?;
    Ok(p)
}

/// `"cap:<axis>:<θ>"` (spheres), `"ball:<center>:<ρ>"`, `"box:<lo>:<hi>"`
/// (Euclidean; a single number is broadcast to every coordinate).
pub fn parse_body(spec: &str, manifold: &AnyManifold) -> Result<ConvexBody, Error> {
    let field = "body";
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad(field, spec, "expected <kind>:<a>:<b>"));
    }
    let body = match (parts[0].trim(), manifold) {
        ("cap", AnyManifold::Sphere(s)) => {
            let axis = parse_point(field, parts[1], manifold, None)?;
            ConvexBody::spherical_cap(*s, axis, parse_scalar(field, parts[2])?)
        }
        ("cap", _) => return Err(bad(field, spec, "caps live on spheres")),
        ("ball", _) => {
            let c = parse_point(field, parts[1], manifold, None)?;
            ConvexBody::geodesic_ball(*manifold, c, parse_scalar(field, parts[2])?)
        }
        ("box", AnyManifold::Euclidean(_)) => {
            let n = manifold.ambient_dim();
            let corner = |s: &str| -> Result<Vec<f64>, Error> {
                let v = parse_list(field, s)?;
                match v.len() {
                    1 => Ok(vec![v[0]; n]),
                    l if l == n => Ok(v),
                    l => Err(bad(field, spec, format!("corner has {l} coordinates, expected {n}"))),
                }
            };
            ConvexBody::euclidean_box(corner(parts[1])?, corner(parts[2])?)
        }
        ("box", _) => return Err(bad(field, spec, "boxes live in euclidean space")),
        (other, _) => return Err(bad(field, spec, format!("unknown body kind {other:?}"))),
    };
    body.map_err(|e| bad(field, spec, e))
}

/// `"distance_to:<point>"`, `"sqdist_to:<point>"`, `"linear:<vector>"`
/// (Euclidean only) or `"constant:<c>"`.
pub fn parse_target(field: &str, spec: &str, body: &ConvexBody) -> Result<Objective, Error> {
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| bad(field, spec, "expected <kind>:<argument>"))?;
    let m = body.manifold();
    let center = body.metadata().inner_center;
    Ok(match kind.trim() {
        "distance_to" => Objective::DistanceTo(parse_point(field, arg, m, Some(&center))?),
        "sqdist_to" => Objective::SquaredDistanceTo(parse_point(field, arg, m, Some(&center))?),
        "linear" => {
            if !matches!(m, AnyManifold::Euclidean(_)) {
                return Err(bad(field, spec, "linear targets need a euclidean manifold"));
            }
            let c = parse_list(field, arg)?;
            if c.len() != m.ambient_dim() {
                return Err(bad(field, spec, format!("expected {} coefficients", m.ambient_dim())));
            }
            Objective::Linear(c)
        }
        "constant" => Objective::Constant(parse_scalar(field, arg)?),
        other => return Err(bad(field, spec, format!("unknown target {other:?}"))),
    })
}

pub const CHECKS: &[&str] = &[
    "affine_needle",
    "kv_needle",
    "z_logconcavity",
    "rev_iso",
    "isoperimetry",
    "one_step",
    "adjacent_dist",
    "low_temperature_expectation",
    "tv_decay",
];

pub fn list_builtins() -> String {
    let mut s = String::from(
        "manifolds:
  euclidean:<n>     R^n
  sphere:<n>        unit sphere S^n in R^(n+1)
  so:<n>            special orthogonal group SO(n), row-major n*n coordinates
points:
  north | identity | origin | center | <x1,x2,...>
bodies:
  cap:<axis>:<theta>   spherical cap, 0 < theta < pi/2
  ball:<center>:<rho>  geodesic ball, rho < injectivity_radius/2
  box:<lo>:<hi>        axis-aligned box (euclidean)
targets:
  distance_to:<point>  L = 1
  sqdist_to:<point>    L = 2D
  linear:<c1,c2,...>   L = |c| (euclidean)
  constant:<c>         L = 0
checks:
",
    );
    for c in CHECKS {
        s.push_str("  ");
        s.push_str(c);
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifold_strings() {
        assert!(matches!(parse_manifold("sphere:2", None, None), Ok(AnyManifold::Sphere(_))));
        assert!(matches!(parse_manifold("so:3", None, None), Ok(AnyManifold::SpecialOrthogonal(_))));
        let e = parse_manifold("sphere:-1", None, None).unwrap_err().to_string();
        assert!(e.starts_with("manifold:"), "{e}");
        assert!(parse_manifold("torus:2", None, None).is_err());
        assert!(parse_manifold("euclidean:2", Some(1.0), None).is_err());
    }

    #[test]
    fn bodies_and_targets() {
        let s = parse_manifold("sphere:2", None, None).unwrap();
        let cap = parse_body("cap:north:1.0", &s).unwrap();
        assert_eq!(cap.metadata().inner_radius, 1.0);
        assert!(parse_body("cap:north:2.0", &s).is_err());
        assert!(parse_body("cap:1,0:1.0", &s).is_err());
        let e = parse_manifold("euclidean:3", None, None).unwrap();
        let b = parse_body("box:0:1", &e).unwrap();
        assert_eq!(b.metadata().inner_radius, 0.5);
        assert!(matches!(parse_target("t", "linear:1,0,0", &b), Ok(Objective::Linear(_))));
        assert!(parse_target("t", "linear:1,0,0", &cap).is_err());
        assert!(matches!(parse_target("t", "distance_to:center", &cap), Ok(Objective::DistanceTo(_))));
    }
}
