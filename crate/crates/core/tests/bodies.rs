use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, PI};
use std::sync::Arc;

use geowalk_core::body::ConvexBody;
use geowalk_core::diagnostics::cap::polar_angle;
use geowalk_core::manifold::{Manifold, ManifoldPoint, SpecialOrthogonal, Sphere};
use geowalk_core::quadrature::{integrate, QuadratureSpec};
use geowalk_core::rng::RngStream;
use geowalk_core::stats::ks_one_sample;

fn hemisphere() -> ConvexBody {
    let s = Sphere::new(2);
    ConvexBody::from_oracle(s, Arc::new(|x: &ManifoldPoint| x.coords[2] >= 0.0), s.north_pole(), FRAC_PI_2, PI).unwrap()
}

#[test]
fn hemisphere_polar_angle_has_sine_density() {
    let body = hemisphere();
    let axis = Sphere::new(2).north_pole();
    let mut rng = RngStream::new(21);
    let angles: Vec<f64> = (0..100_000)
        .map(|_| polar_angle(&axis, &body.rejection_sample_uniform(&mut rng).unwrap()))
        .collect();
    // ∫₀^φ sin t dt / ∫₀^{π/2} sin t dt
    let ks = ks_one_sample(&angles, |p| 1.0 - p.clamp(0.0, FRAC_PI_2).cos());
    assert!(ks < 0.01, "{ks}");
}

#[test]
fn unit_cube_is_componentwise_uniform() {
    let body = ConvexBody::euclidean_box(vec![0.0; 3], vec![1.0; 3]).unwrap();
    let mut rng = RngStream::new(2);
    let xs: Vec<ManifoldPoint> = (0..100_000).map(|_| body.rejection_sample_uniform(&mut rng).unwrap()).collect();
    for i in 0..3 {
        let c: Vec<f64> = xs.iter().map(|x| x.coords[i]).collect();
        assert!(ks_one_sample(&c, |v| v.clamp(0.0, 1.0)) < 0.01);
    }
}

#[test]
fn cap_acceptance_rate_matches_volume_fraction() {
    let s = Sphere::new(4);
    let cap = ConvexBody::spherical_cap(s, s.north_pole(), FRAC_PI_6).unwrap();
    let spec = QuadratureSpec::default();
    let num = integrate(|t: f64| t.sin().powi(3), 0.0, FRAC_PI_6, &[], &spec).unwrap().value;
    let den = integrate(|t: f64| t.sin().powi(3), 0.0, PI, &[], &spec).unwrap().value;
    let p = num / den;
    let mut rng = RngStream::new(5);
    let samples = 10_000u64;
    let attempts: u64 = (0..samples).map(|_| cap.rejection_sample_counted(&mut rng).unwrap().1).sum();
    let rate = samples as f64 / attempts as f64;
    // Attempts are geometric: sd of the mean count is √(1−p)/p/√N.
    let sigma = p * ((1.0 - p) / samples as f64).sqrt();
    assert!((rate - p).abs() < 3.0 * sigma, "{rate} vs {p} ± {sigma}");
}

#[test]
fn membership_consistent_with_metadata() {
    let s = Sphere::new(3);
    let cap = ConvexBody::spherical_cap(s, s.north_pole(), 1.0).unwrap();
    let meta = cap.metadata();
    let mut rng = RngStream::new(9);
    for _ in 0..10_000 {
        let u = s.sample_tangent_gaussian(&meta.inner_center, &mut rng);
        let norm = s.tangent_norm(&meta.inner_center, &u);
        let radius = 0.999 * meta.inner_radius * rng.uniform();
        let x = s.exp_map(&meta.inner_center, &u.scaled(radius / norm)).unwrap();
        assert!(cap.contains(&x).unwrap());
    }
    for _ in 0..10_000 {
        let x = cap.rejection_sample_uniform(&mut rng).unwrap();
        let y = cap.rejection_sample_uniform(&mut rng).unwrap();
        assert!(s.distance(&x, &y).unwrap() <= meta.diameter + 1e-9);
        // Chord midpoint, normalized, is the geodesic midpoint.
        let mut mid: Vec<f64> = x.coords.iter().zip(&y.coords).map(|(a, b)| a + b).collect();
        Sphere::project(&mut mid);
        assert!(cap.contains(&ManifoldPoint::new(mid)).unwrap());
    }
}

#[test]
fn rotation_ball_sampler_and_metadata() {
    let so = SpecialOrthogonal::new(3);
    let ball = ConvexBody::geodesic_ball(so, so.identity(), 1.2).unwrap();
    let meta = ball.metadata();
    assert_eq!((meta.inner_radius, meta.diameter), (1.2, 2.4));
    let mut rng = RngStream::new(4);
    for _ in 0..2000 {
        let x = ball.rejection_sample_uniform(&mut rng).unwrap();
        assert!(so.distance(&so.identity(), &x).unwrap() <= 1.2);
    }
}
