//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Reference values are computed here from closed forms
//! rather than taken from the library's own helpers wherever possible.

use std::f64::consts::{E, PI};
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use geowalk::suite::{affine_instance, kv_instance, z_instance};
use geowalk::Pool;
use geowalk_core::anneal::{anneal_trials, make_schedule, AnnealConfig, StepsPerPhase};
use geowalk_core::body::ConvexBody;
use geowalk_core::diagnostics::gibbs::{check_low_temp_expectation, estimate_l2_warmness};
use geowalk_core::diagnostics::kernel::{is_nonincreasing_within, tv_decay_curve, StartLaw};
use geowalk_core::diagnostics::needle::{
    check_affine_needle_lemma, check_kv_needle_lemma, check_partition_function_logconcavity, ConvexProfile,
};
use geowalk_core::diagnostics::volume::{check_interior_volume, InteriorClassifier};
use geowalk_core::manifold::{Manifold, ManifoldPoint, SpecialOrthogonal, Sphere, TangentVector};
use geowalk_core::quadrature::QuadratureSpec;
use geowalk_core::rng::{domain, RngStream};
use geowalk_core::stats::{ks_one_sample, ks_sigma, ks_two_sample};
use geowalk_core::target::{GibbsTarget, Objective};
use geowalk_core::walker::{run_chain, run_chain_with, uniform_step, ChainSchedule, WalkParams, WalkState};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

/// Polar angle measured independently of the library: `acos` of the last
/// coordinate (the caps below are all centered at the north pole).
fn polar(x: &ManifoldPoint) -> f64 {
    x.coords.last().unwrap().clamp(-1.0, 1.0).acos()
}

/// Uniform cap on S²: the polar angle has CDF `(1 − cos φ)/(1 − cos θ)`.
fn s2_cap_cdf(theta: f64) -> impl Fn(f64) -> f64 {
    move |phi| (1.0 - phi.clamp(0.0, theta).cos()) / (1.0 - theta.cos())
}

fn cap60() -> ConvexBody {
    let s = Sphere::new(2);
    ConvexBody::spherical_cap(s, s.north_pole(), PI / 3.0).unwrap()
}

fn unit_tangent<M: Manifold>(m: &M, x: &ManifoldPoint, rng: &mut RngStream) -> TangentVector {
    let u = m.sample_tangent_gaussian(x, rng);
    let norm = m.tangent_norm(x, &u);
    u.scaled(1.0 / norm)
}

fn round_trips<M: Manifold>(m: &M, start: ManifoldPoint, rng: &mut RngStream) -> (f64, f64) {
    let (mut worst, mut worst_zero) = (0.0f64, 0.0f64);
    let t_max = 0.9 * m.descriptor().injectivity_radius;
    for _ in 0..1000 {
        // Random base point: a long geodesic from `start`.
        let v = m.sample_tangent_gaussian(&start, rng);
        let x = m.exp_map(&start, &v).unwrap();
        let u = unit_tangent(m, &x, rng);
        let t = t_max * (1e-6 + (1.0 - 1e-6) * rng.uniform());
        let y = m.exp_map(&x, &u.scaled(t)).unwrap();
        worst = worst.max((m.distance(&x, &y).unwrap() - t).abs());
        let z = m.exp_map(&x, &u.scaled(0.0)).unwrap();
        let dz = x.coords.iter().zip(&z.coords).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst_zero = worst_zero.max(dz);
    }
    (worst, worst_zero)
}

fn c1_round_trips() -> Verdict {
    let t = Instant::now();
    let s9 = Sphere::new(9);
    let so3 = SpecialOrthogonal::new(3);
    let (ds, zs) = round_trips(&s9, s9.north_pole(), &mut RngStream::new(1));
    let (dg, zg) = round_trips(&so3, so3.identity(), &mut RngStream::new(2));
    let el = t.elapsed();
    let pass = ds <= 1e-8 && dg <= 1e-8 && zs <= 1e-12 && zg <= 1e-12 && el < Duration::from_secs(10);
    verdict(
        pass,
        format!("max |d − t|: S⁹ {ds:.2e}, SO(3) {dg:.2e}; exp(x,0) error {:.1e}; {:.2}s", zs.max(zg), el.as_secs_f64()),
    )
}

fn c2_cap_sampler() -> Verdict {
    let t = Instant::now();
    let cap = cap60();
    let mut rng = RngStream::derive(2024, domain::CHAIN, 0);
    let start = cap.rejection_sample_uniform(&mut rng).unwrap();
    let params = WalkParams::new(0.5, 2024, 100_000);
    let out = run_chain_with(start, &cap, &params, None, ChainSchedule { burn_in: 0, thin: 10 }, &mut rng).unwrap();
    let angles: Vec<f64> = out.samples.iter().map(|s| polar(&s.point)).collect();
    let ks = ks_one_sample(&angles, s2_cap_cdf(PI / 3.0));
    let el = t.elapsed();
    verdict(
        ks < 0.02 && el < Duration::from_secs(60),
        format!("{} samples, KS {ks:.4} (< 0.02), {:.2}s", angles.len(), el.as_secs_f64()),
    )
}

fn c3_stationarity(pool: &Pool) -> Verdict {
    use geowalk_core::exec::Executor;
    let cap = cap60();
    let params = WalkParams::new(0.5, 0, 1);
    let evolved: Vec<f64> = pool.map(10_000, |i| {
        let mut rng = RngStream::derive(31, domain::CHAIN, i as u64);
        let mut st = WalkState::new(cap.rejection_sample_uniform(&mut rng).unwrap());
        uniform_step(&mut st, &cap, &params, &mut rng).unwrap();
        polar(&st.point)
    });
    let mut rng = RngStream::derive(31, domain::REFERENCE, 0);
    let fresh: Vec<f64> = (0..10_000).map(|_| polar(&cap.rejection_sample_uniform(&mut rng).unwrap())).collect();
    let ks = ks_two_sample(&evolved, &fresh);
    verdict(ks < 0.02, format!("KS {ks:.4} (< 0.02, null σ {:.4})", ks_sigma(10_000, Some(10_000))))
}

fn c4_tv_decay(pool: &Pool) -> Verdict {
    let cap = cap60();
    let params = WalkParams::new(0.2, 44, 0);
    let start = StartLaw::PointMass(Sphere::new(2).north_pole());
    let curve = tv_decay_curve(&cap, &params, &start, &[0, 25, 100, 400, 1600], 10_000, 10_000, polar, pool).unwrap();
    let last = curve.last().unwrap().ks;
    let mono = is_nonincreasing_within(&curve, 3.0);
    let shape: Vec<String> = curve.iter().map(|p| format!("{}:{:.4}", p.step, p.ks)).collect();
    verdict(mono && last < 0.03, format!("KS by step [{}], 3σ = {:.4}", shape.join(" "), 3.0 * curve[0].sigma))
}

fn c5_affine_needle() -> Verdict {
    let t = Instant::now();
    let spec = QuadratureSpec::default();
    let (mut worst, mut gap, mut all) = (f64::INFINITY, 0.0f64, true);
    for i in 0..100 {
        let p = affine_instance(&mut RngStream::derive(5, domain::INSTANCE, i as u64), i);
        let r = check_affine_needle_lemma(p.a, p.b, p.c1, p.c2, p.n, p.eps, &spec).unwrap();
        all &= r.passed && r.margin >= -1e-9;
        // Margin relative to the larger side, so scale does not hide failures.
        worst = worst.min(r.margin / r.rhs.abs().max(r.lhs.abs()));
        gap = gap.max(r.detail("closed_form_gap").unwrap());
    }
    let el = t.elapsed();
    verdict(
        all && el < Duration::from_secs(5),
        format!("100 instances, min relative margin {worst:.3e}, max quadrature-vs-antiderivative gap {gap:.1e}, {:.3}s", el.as_secs_f64()),
    )
}

fn c6_kv_needle() -> Verdict {
    let spec = QuadratureSpec::default();
    let mut all = true;
    for i in 0..100 {
        let (h, n) = kv_instance(&mut RngStream::derive(6, domain::INSTANCE, i));
        let r = check_kv_needle_lemma(|z| h.eval(z), h.a, h.b, n, &h.knots, &spec).unwrap();
        all &= r.passed && r.margin >= -1e-9;
    }
    // h(z) = z on [0, 10], n = 1: ∫ z e^{-z} = γ(2, 10) = 1 − 11e^{-10}, ∫ e^{-z} = 1 − e^{-10}.
    let r = check_kv_needle_lemma(|z| z, 0.0, 10.0, 1, &[], &spec).unwrap();
    let (g2, g1) = (1.0 - 11.0 * (-10f64).exp(), 1.0 - (-10f64).exp());
    let err = (r.lhs - g2).abs().max((r.rhs - 2.0 * g1).abs());
    verdict(all && r.passed && err <= 1e-9, format!("100 instances pass: {all}; closed-form error {err:.1e}"))
}

fn c7_z_logconcavity() -> Verdict {
    let spec = QuadratureSpec::default();
    let mut all = true;
    for i in 0..100 {
        let (h, n, alpha, beta) = z_instance(&mut RngStream::derive(7, domain::INSTANCE, i));
        let r = check_partition_function_logconcavity(|x| h.eval(x), h.a, h.b, n, alpha, beta, &h.knots, &spec).unwrap();
        all &= r.passed && r.margin >= -1e-9;
    }
    let h = ConvexProfile::new(0.2, 2.5, 0.3, vec![0.9, 1.7], vec![-1.0, 0.5, 2.0]).unwrap();
    let r = check_partition_function_logconcavity(|x| h.eval(x), 0.2, 2.5, 4, 1.7, 1.7, &h.knots, &spec).unwrap();
    verdict(all && r.margin.abs() <= 1e-9, format!("100 instances pass: {all}; α = β margin {:.1e}", r.margin))
}

fn c8_warmness(pool: &Pool) -> Verdict {
    let s5 = Sphere::new(5);
    let theta = 75f64.to_radians();
    let cap = ConvexBody::spherical_cap(s5, s5.north_pole(), theta).unwrap();
    let f = Objective::DistanceTo(s5.north_pole());
    // T₀ = L·D with L = 1, D = 2θ.
    let sched = make_schedule(2.0 * theta, 5, 0.1, 0.1).unwrap();
    let (th, tc) = (sched.temps[0], sched.temps[1]);
    let w = estimate_l2_warmness(&f, &cap, th, tc, 100_000, 8, pool).unwrap();
    let same = estimate_l2_warmness(&f, &cap, th, th, 100_000, 8, pool).unwrap();
    let pass = w.estimate.value <= 5.0 + 3.0 * w.estimate.stderr && same.estimate.value == 1.0;
    // Informational: a colder adjacent pair (T_hot nearest 0.1, where uniform
    // importance sampling is still reliable) against the small-T limit
    // (1/(q(2 − q)))ⁿ implied by Z(β) ∝ β⁻ⁿ.
    let k = (0..sched.temps.len() - 1)
        .min_by(|&a, &b| (sched.temps[a] - 0.1).abs().total_cmp(&(sched.temps[b] - 0.1).abs()))
        .unwrap();
    let cold = estimate_l2_warmness(&f, &cap, sched.temps[k], sched.temps[k + 1], 100_000, 8, pool).unwrap();
    let q = 1.0 / (1.0 - 1.0 / 5f64.sqrt());
    let cone = (1.0 / ((2.0 - q) * q)).powi(5);
    println!(
        "INFO  [8] pair T = {:.4} → {:.4}: estimate {:.3} ± {:.3}; small-T limit {cone:.1}",
        sched.temps[k],
        sched.temps[k + 1],
        cold.estimate.value,
        cold.estimate.stderr
    );
    verdict(
        pass,
        format!(
            "hottest pair T = {th:.4} → {tc:.4}: {:.4} ± {:.1e} (≤ 5 + 3σ); equal-temperature control = {}",
            w.estimate.value, w.estimate.stderr, same.estimate.value
        ),
    )
}

fn c9_low_temperature() -> Verdict {
    let cap = cap60();
    let axis = Sphere::new(2).north_pole();
    let target = GibbsTarget::new(Objective::DistanceTo(axis.clone()), 1.0, 0.05);
    let params = WalkParams::new(0.05, 9, 220_000);
    let out = run_chain(axis, &cap, &params, Some(&target), ChainSchedule { burn_in: 20_000, thin: 1 }).unwrap();
    let fs: Vec<f64> = out.samples.iter().map(|s| s.f_value.unwrap()).collect();
    let r = check_low_temp_expectation(&fs, 0.05, 2, 0.0, 50).unwrap();
    // Exact Gibbs mean for the cap: ∫ φ e^{−φ/T} sin φ / ∫ e^{−φ/T} sin φ over [0, π/3].
    let (mut num, mut den) = (0.0, 0.0);
    let steps = 200_000;
    for i in 0..steps {
        let phi = (i as f64 + 0.5) / steps as f64 * PI / 3.0;
        let w = (-phi / 0.05).exp() * phi.sin();
        num += phi * w;
        den += w;
    }
    println!("INFO  [9] exact Gibbs mean of f: {:.5}", num / den);
    verdict(r.passed, format!("chain mean {:.5} ± {:.5} vs T(n+1) = {:.2}", r.lhs, r.mc_stderr, r.rhs))
}

fn c10_interior_volume(pool: &Pool) -> Verdict {
    let cap = cap60();
    let r = PI / 3.0;
    let eps = r / 4.0;
    let rep = check_interior_volume(&cap, eps, 100_000, InteriorClassifier::default(), 10, pool).unwrap();
    let bound = E * 2.0 * eps / r;
    let cap_ok = (rep.rhs - bound).abs() < 1e-12 && rep.lhs <= bound + 3.0 * rep.mc_stderr;
    // Box control: the fraction of [0,1]×[0,2]×[0,3] within ε of a face is
    // 1 − Π(1 − 2ε/wᵢ) with r = 1/2, n = 3, ε = r/(2n).
    let bx = ConvexBody::euclidean_box(vec![0.0; 3], vec![1.0, 2.0, 3.0]).unwrap();
    let be = 0.5 / 6.0;
    let brep = check_interior_volume(&bx, be, 100_000, InteriorClassifier::BoundaryDistance, 10, pool).unwrap();
    let exact = 1.0 - (1.0 - 2.0 * be) * (1.0 - be) * (1.0 - 2.0 * be / 3.0);
    let box_ok = (brep.lhs - exact).abs() <= 3.0 * brep.mc_stderr;
    verdict(
        cap_ok && box_ok,
        format!(
            "cap: fraction {:.4} ± {:.4} vs bound {bound:.4}; box: {:.4} ± {:.4} vs exact {exact:.4}",
            rep.lhs, rep.mc_stderr, brep.lhs, brep.mc_stderr
        ),
    )
}

fn c11_annealing(pool: &Pool) -> Verdict {
    let t = Instant::now();
    let s5 = Sphere::new(5);
    let cap = ConvexBody::spherical_cap(s5, s5.north_pole(), 75f64.to_radians()).unwrap();
    let f = Objective::DistanceTo(s5.north_pole());
    let cfg = AnnealConfig {
        epsilon: 0.1,
        fail_prob: 0.1,
        steps_per_phase: StepsPerPhase::Auto,
        lipschitz: None,
        budget_constant: 1.0,
        global_budget: 1_000_000,
        delta: None,
        t0: None,
    };
    let results = anneal_trials(&cap, &f, &cfg, 11, 20, pool);
    let values: Vec<f64> = results.into_iter().map(|r| r.unwrap().value).collect();
    let good = values.iter().filter(|&&v| v <= 0.1).count();
    let worst = values.iter().copied().fold(0.0, f64::max);
    let el = t.elapsed();
    verdict(
        good >= 18 && el < Duration::from_secs(600),
        format!("{good}/20 trials with value ≤ 0.1 (worst {worst:.4}), {:.1}s", el.as_secs_f64()),
    )
}

fn c12_schedule() -> Verdict {
    let s = make_schedule(10.0, 4, 0.1, 0.1).unwrap();
    // I = ⌈√n·ln(T₀(n+1)/(ε·δ))⌉ = ⌈2·ln 5000⌉.
    let expected = (2.0 * (10.0f64 * 5.0 / 0.01).ln()).ceil() as usize;
    let exact_ratio = s.temps.windows(2).all(|w| w[1] / w[0] == 0.5);
    verdict(
        s.phases == 18 && expected == 18 && exact_ratio && s.temps.len() == 19,
        format!("I = {}, ratio exactly 1/2 at every phase: {exact_ratio}", s.phases),
    )
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn c13_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let cap = "cap:north:1.0471975511965976";
    let configs = [
        ("sample", format!("mode = \"sample\"\nmanifold = \"sphere:2\"\nbody = \"{cap}\"\n[walk]\nmax_steps = 5000\nburn_in = 100\nthin = 3\nchains = 3\n[gibbs]\ntarget = \"distance_to:north\"\ntemperature = 0.2\n")),
        ("anneal", "mode = \"anneal\"\nmanifold = \"sphere:3\"\nbody = \"cap:north:1.0\"\n[anneal]\ntarget = \"distance_to:north\"\ntrials = 3\nglobal_budget = 30000\n".to_string()),
        ("diagnose", format!("mode = \"diagnose\"\nmanifold = \"sphere:2\"\nbody = \"{cap}\"\n[diagnose]\ninstances = 20\nmc_samples = 3000\nconductance_trials = 1000\nchain_steps = 10000\nreplicas = 500\n")),
        ("run", "mode = \"diagnose\"\nmanifold = \"so:3\"\nbody = \"ball:identity:0.6\"\n[diagnose]\ninstances = 5\nmc_samples = 2000\nconductance_trials = 200\nchain_steps = 5000\nreplicas = 200\n".to_string()),
    ];
    let mut notes = Vec::new();
    let mut pass = true;
    for (sub, text) in &configs {
        let cfg = dir.path().join(format!("{sub}.toml"));
        fs::write(&cfg, text).unwrap();
        let mut outs = Vec::new();
        for (k, jobs) in ["1", "2"].iter().enumerate() {
            let out = dir.path().join(format!("{sub}-{k}"));
            let o = Command::new(env!("CARGO_BIN_EXE_geowalk"))
                .args([sub, "--config", cfg.to_str().unwrap(), "--seed", "5", "--jobs", jobs, "--output-dir", out.to_str().unwrap()])
                .output()
                .unwrap();
            pass &= o.status.success();
            outs.push((files(&out), o.stdout));
        }
        let same = outs[0] == outs[1] && !outs[0].0.is_empty();
        pass &= same;
        notes.push(format!("{sub}: {}", if same { "identical" } else { "DIFFERENT" }));
    }
    let lb: Vec<Vec<u8>> = (0..2)
        .map(|_| Command::new(env!("CARGO_BIN_EXE_geowalk")).arg("list-builtins").output().unwrap().stdout)
        .collect();
    pass &= lb[0] == lb[1];
    notes.push(format!("list-builtins: {}", if lb[0] == lb[1] { "identical" } else { "DIFFERENT" }));
    verdict(pass, notes.join(", "))
}

fn main() {
    let pool = Pool::new(0).unwrap();
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        ("geometry round trips", Box::new(c1_round_trips)),
        ("uniform sampler on a 60° cap", Box::new(c2_cap_sampler)),
        ("stationarity preservation", Box::new(|| c3_stationarity(&pool))),
        ("TV decay from a point mass", Box::new(|| c4_tv_decay(&pool))),
        ("affine needle inequality", Box::new(c5_affine_needle)),
        ("KV needle inequality", Box::new(c6_kv_needle)),
        ("partition-function log-concavity", Box::new(c7_z_logconcavity)),
        ("adjacent-temperature warmness", Box::new(|| c8_warmness(&pool))),
        ("low-temperature expectation", Box::new(c9_low_temperature)),
        ("interior volume", Box::new(|| c10_interior_volume(&pool))),
        ("end-to-end annealing", Box::new(|| c11_annealing(&pool))),
        ("schedule arithmetic", Box::new(c12_schedule)),
        ("determinism", Box::new(c13_determinism)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        println!("{} [{}] {name}: {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
