use geowalk_core::anneal::{anneal_trials, make_schedule, AnnealConfig};
use geowalk_core::body::ConvexBody;
use geowalk_core::exec::Sequential;
use geowalk_core::manifold::{SpecialOrthogonal, Sphere};
use geowalk_core::target::Objective;
use proptest::prelude::*;

proptest! {
    #[test]
    fn schedules_are_geometric_and_reach_the_target(
        t0 in 0.01f64..100.0, n in 2usize..50, eps in 0.001f64..1.0, fail in 0.001f64..0.9
    ) {
        let target = eps * fail / (n as f64 + 1.0);
        prop_assume!(t0 > target);
        let s = make_schedule(t0, n, eps, fail).unwrap();
        prop_assert_eq!(s.temps.len(), s.phases + 1);
        prop_assert_eq!(s.temps[0], t0);
        let q = 1.0 - 1.0 / (n as f64).sqrt();
        for w in s.temps.windows(2) {
            prop_assert!(w[1] < w[0]);
            prop_assert!((w[1] / w[0] - q).abs() <= 2.0 * f64::EPSILON);
        }
        prop_assert!(*s.temps.last().unwrap() <= target * (1.0 + 1e-9));
    }
}

#[test]
fn annealing_finds_cap_axis() {
    let s = Sphere::new(3);
    let cap = ConvexBody::spherical_cap(s, s.north_pole(), 1.2).unwrap();
    let f = Objective::DistanceTo(s.north_pole());
    let cfg = AnnealConfig {
        global_budget: 200_000,
        ..AnnealConfig::default()
    };
    let runs = anneal_trials(&cap, &f, &cfg, 3, 5, &Sequential);
    let good = runs.iter().filter(|r| r.as_ref().unwrap().value <= cfg.epsilon).count();
    assert!(good >= 4, "{good}/5");
}

#[test]
fn annealing_on_rotations() {
    let so = SpecialOrthogonal::new(3);
    let ball = ConvexBody::geodesic_ball(so, so.identity(), 1.0).unwrap();
    let f = Objective::SquaredDistanceTo(so.identity());
    let cfg = AnnealConfig {
        global_budget: 100_000,
        delta: Some(0.02),
        ..AnnealConfig::default()
    };
    let runs = anneal_trials(&ball, &f, &cfg, 1, 2, &Sequential);
    for r in runs {
        assert!(r.unwrap().value <= cfg.epsilon);
    }
}
