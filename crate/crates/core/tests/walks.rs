use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use geowalk_core::body::ConvexBody;
use geowalk_core::diagnostics::cap::{cap_polar_cdf, polar_angle};
use geowalk_core::diagnostics::kernel::estimate_one_step_tv;
use geowalk_core::manifold::{ManifoldPoint, Sphere};
use geowalk_core::rng::RngStream;
use geowalk_core::stats::{ks_one_sample, ks_two_sample, normal_cdf};
use geowalk_core::target::{GibbsTarget, Objective};
use geowalk_core::walker::{
    estimate_local_conductance, run_chain, uniform_step, ChainSchedule, WalkParams, WalkState,
};

#[test]
fn hemisphere_walk_has_uniform_polar_marginal() {
    let s = Sphere::new(2);
    let body = ConvexBody::from_oracle(s, Arc::new(|x: &ManifoldPoint| x.coords[2] >= 0.0), s.north_pole(), FRAC_PI_2, PI)
        .unwrap();
    let mut rng = RngStream::new(8);
    let start = body.rejection_sample_uniform(&mut rng).unwrap();
    let params = WalkParams::new(0.5, 8, 100_000);
    let out = run_chain(start, &body, &params, None, ChainSchedule { burn_in: 0, thin: 10 }).unwrap();
    let axis = s.north_pole();
    let angles: Vec<f64> = out.samples.iter().map(|p| polar_angle(&axis, &p.point)).collect();
    let ks = ks_one_sample(&angles, |p| 1.0 - p.clamp(0.0, FRAC_PI_2).cos());
    assert!(ks < 0.02, "{ks}");
}

#[test]
fn one_step_from_uniform_stays_uniform() {
    let s = Sphere::new(2);
    let cap = ConvexBody::spherical_cap(s, s.north_pole(), PI / 3.0).unwrap();
    let axis = s.north_pole();
    let params = WalkParams::new(0.3, 0, 1);
    let mut rng = RngStream::new(12);
    let evolved: Vec<f64> = (0..10_000)
        .map(|_| {
            let mut st = WalkState::new(cap.rejection_sample_uniform(&mut rng).unwrap());
            uniform_step(&mut st, &cap, &params, &mut rng).unwrap();
            polar_angle(&axis, &st.point)
        })
        .collect();
    let fresh: Vec<f64> = (0..10_000).map(|_| polar_angle(&axis, &cap.rejection_sample_uniform(&mut rng).unwrap())).collect();
    assert!(ks_two_sample(&evolved, &fresh) < 0.02);
}

#[test]
fn metropolis_matches_gibbs_reference() {
    let s = Sphere::new(2);
    let axis = s.north_pole();
    let cap = ConvexBody::spherical_cap(s, axis.clone(), 75f64.to_radians()).unwrap();
    // Interior point 0.3 rad from the axis.
    let p = ManifoldPoint::new(vec![0.3f64.sin(), 0.0, 0.3f64.cos()]);
    let f = Objective::DistanceTo(p.clone());
    let t = 0.2;
    let target = GibbsTarget::new(f.clone(), 1.0, t);
    let params = WalkParams::new(0.3, 17, 200_000);
    let out = run_chain(p.clone(), &cap, &params, Some(&target), ChainSchedule { burn_in: 2_000, thin: 1 }).unwrap();
    let chain_f: Vec<f64> = out.samples.iter().map(|x| x.f_value.unwrap()).collect();
    // Reference: uniform proposals accepted with probability e^{−(f − f_min)/T}, f_min = 0.
    let mut rng = RngStream::new(99);
    let mut reference = Vec::new();
    while reference.len() < 20_000 {
        let x = cap.rejection_sample_uniform(&mut rng).unwrap();
        let v = f.eval(cap.manifold(), &x).unwrap();
        if rng.uniform() < (-v / t).exp() {
            reference.push(v);
        }
    }
    let ks = ks_two_sample(&chain_f, &reference);
    assert!(ks < 0.03, "{ks}");
}

#[test]
fn tiny_steps_in_a_cube_are_almost_never_rejected() {
    let cube = ConvexBody::euclidean_box(vec![0.0; 3], vec![1.0; 3]).unwrap();
    let start = cube.metadata().inner_center;
    // Spread after k steps is about δ√(nk) ≈ 0.04, far from every face.
    let params = WalkParams::new(1e-4, 1, 50_000);
    let out = run_chain(start, &cube, &params, None, ChainSchedule { burn_in: 0, thin: 100 }).unwrap();
    assert!(out.stats.rejection_fraction() < 1e-3);
}

#[test]
fn local_conductance_at_a_face_is_a_half() {
    let cube = ConvexBody::euclidean_box(vec![0.0; 3], vec![1.0; 3]).unwrap();
    let x = ManifoldPoint::new(vec![0.0, 0.5, 0.5]);
    let trials = 40_000;
    let l = estimate_local_conductance(&x, &cube, &WalkParams::new(0.01, 0, 0), trials, &mut RngStream::new(3)).unwrap();
    let sigma = (0.25f64 / trials as f64).sqrt();
    assert!((l - 0.5).abs() < 3.0 * sigma, "{l}");
}

#[test]
fn local_conductance_near_a_face_is_a_normal_tail() {
    // Distance h from one face only: ℓ = Φ(h/δ).
    let cube = ConvexBody::euclidean_box(vec![0.0; 2], vec![1.0; 2]).unwrap();
    let (h, delta) = (0.01, 0.01);
    let x = ManifoldPoint::new(vec![h, 0.5]);
    let trials = 40_000;
    let l = estimate_local_conductance(&x, &cube, &WalkParams::new(delta, 0, 0), trials, &mut RngStream::new(4)).unwrap();
    let exact = normal_cdf(h / delta);
    let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
    assert!((l - exact).abs() < 3.5 * sigma, "{l} vs {exact}");
}

#[test]
fn center_conductance_is_one_for_small_steps() {
    let s = Sphere::new(3);
    let cap = ConvexBody::spherical_cap(s, s.north_pole(), 1.0).unwrap();
    let l = estimate_local_conductance(&s.north_pole(), &cap, &WalkParams::new(0.05, 0, 0), 10_000, &mut RngStream::new(1)).unwrap();
    assert!(l >= 0.999);
}

#[test]
fn one_step_overlap_shrinks_with_distance() {
    let s = Sphere::new(2);
    let cap = ConvexBody::spherical_cap(s, s.north_pole(), 1.2).unwrap();
    let delta = 0.1;
    let x = s.north_pole();
    let mut last: Option<(f64, f64)> = None;
    for &d in &[0.002, 0.01, 0.03, 0.08, 0.2] {
        let y = ManifoldPoint::new(vec![f64::sin(d), 0.0, f64::cos(d)]);
        let r = estimate_one_step_tv(&x, &y, &cap, delta, 20_000, &mut RngStream::new(6)).unwrap();
        if d < 0.01 {
            assert!(r.tv.value < 0.2, "{r:?}");
        }
        if let Some((prev, prev_se)) = last {
            assert!(r.tv.value + 3.0 * (r.tv.stderr + prev_se) >= prev, "d={d}: {} < {prev}", r.tv.value);
        }
        last = Some((r.tv.value, r.tv.stderr));
    }
}

#[test]
fn chain_from_point_mass_converges_to_cap_law() {
    let s = Sphere::new(3);
    let theta = 0.9;
    let cap = ConvexBody::spherical_cap(s, s.north_pole(), theta).unwrap();
    let axis = s.north_pole();
    let params = WalkParams::new(0.3, 4, 400_000);
    let out = run_chain(axis.clone(), &cap, &params, None, ChainSchedule { burn_in: 1_000, thin: 20 }).unwrap();
    let angles: Vec<f64> = out.samples.iter().map(|p| polar_angle(&axis, &p.point)).collect();
    let ks = ks_one_sample(&angles, cap_polar_cdf(3, theta));
    assert!(ks < 0.02, "{ks}");
}
