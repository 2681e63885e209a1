//! The built-in diagnostic checks run by `diagnose`.
//!
//! Quadrature checks draw randomized instances from streams derived from
//! `(seed, instance index)`; Monte Carlo checks run against the configured
//! body.

use geowalk_core::anneal::make_schedule;
use geowalk_core::body::BodyShape;
use geowalk_core::diagnostics::cap::polar_angle;
use geowalk_core::diagnostics::gibbs::{check_low_temp_expectation, estimate_l2_warmness, warmness_bound};
use geowalk_core::diagnostics::kernel::{estimate_one_step_tv, tv_decay_curve, StartLaw};
use geowalk_core::diagnostics::needle::{
    check_affine_needle_lemma, check_kv_needle_lemma, check_partition_function_logconcavity, ConvexProfile,
};
use geowalk_core::diagnostics::volume::{
    check_interior_volume, check_isoperimetry, slab_partition, sphere_slab_gap, InteriorClassifier,
    IsoperimetryConfig, Part,
};
use geowalk_core::diagnostics::{DiagnosticError, InequalityReport};
use geowalk_core::exec::Executor;
use geowalk_core::manifold::{AnyManifold, Manifold, ManifoldPoint, TangentVector};
use geowalk_core::quadrature::QuadratureSpec;
use geowalk_core::rng::{domain, RngStream};
use geowalk_core::target::GibbsTarget;
use geowalk_core::walker::{run_chain, ChainSchedule, WalkParams};
use serde::Serialize;

use crate::builtins::CHECKS;
use crate::run::Setup;
use crate::{Error, Pool};

pub enum Outcome {
    Reports(Vec<InequalityReport>),
    Skipped(String),
}

#[derive(Serialize)]
pub struct ReportRow<'a> {
    pub config_hash: &'a str,
    pub check: &'a str,
    pub instance: usize,
    #[serde(flatten)]
    pub report: &'a InequalityReport,
}

/// Resolves the `checks` list; empty means every check.
pub fn selected_checks(names: &[String]) -> Result<Vec<&'static str>, Error> {
    if names.is_empty() {
        return Ok(CHECKS.to_vec());
    }
    names
        .iter()
        .map(|n| {
            CHECKS
                .iter()
                .copied()
                .find(|c| c == n)
                .ok_or_else(|| Error::Config(format!("diagnose.checks: unknown check {n:?}")))
        })
        .collect()
}

fn diag_err(check: &str, e: DiagnosticError) -> Error {
    match e {
        DiagnosticError::Precondition(m) => Error::Config(format!("{check}: {m}")),
        e => Error::Runtime(format!("{check}: {e}")),
    }
}

// Separate instance streams per check.
fn instance_rng(seed: u64, check: u64, i: usize) -> RngStream {
    RngStream::derive(seed, domain::INSTANCE, (check << 32) | i as u64)
}

fn small_int(rng: &mut RngStream, lo: u32, hi: u32) -> u32 {
    lo + (rng.next_u64() % u64::from(hi - lo + 1)) as u32
}

/// Parameters of one affine-needle instance.
#[derive(Clone, Copy, Debug)]
pub struct AffineInstance {
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
    pub n: u32,
    pub eps: f64,
}

/// Random instance with `n ≤ 20`, `ε ≤ (b − a)/n` (every fourth instance at
/// equality) and `c₁x + c₂ > 0` on `[a, b + ε]`.
pub fn affine_instance(rng: &mut RngStream, i: usize) -> AffineInstance {
    let n = small_int(rng, 1, 20);
    let a = -5.0 + 10.0 * rng.uniform();
    let len = 0.01 + 5.0 * rng.uniform();
    let b = a + len;
    let frac = if i % 4 == 0 { 1.0 } else { 0.05 + 0.95 * rng.uniform() };
    let eps = frac * len / n as f64;
    let c1 = -3.0 + 6.0 * rng.uniform();
    let floor = 0.001 + 3.0 * rng.uniform();
    let c2 = floor - (c1 * a).min(c1 * (b + eps));
    AffineInstance { a, b, c1, c2, n, eps }
}

/// Random convex piecewise-linear `h` on `[a, b] ⊂ [0, ∞)` and `n ≤ 20`.
pub fn kv_instance(rng: &mut RngStream) -> (ConvexProfile, u32) {
    let n = small_int(rng, 1, 20);
    let a = 2.0 * rng.uniform();
    let b = a + 0.1 + 5.0 * rng.uniform();
    let pieces = small_int(rng, 1, 6) as usize;
    (ConvexProfile::random(rng, a, b, pieces, 4.0), n)
}

/// Random `(h, n, α, β)` for the partition-function check, `n ≤ 20`.
pub fn z_instance(rng: &mut RngStream) -> (ConvexProfile, u32, f64, f64) {
    let n = small_int(rng, 1, 20);
    let c = 0.05 + rng.uniform();
    let d = c + 0.1 + 3.0 * rng.uniform();
    let pieces = small_int(rng, 1, 4) as usize;
    let h = ConvexProfile::random(rng, c, d, pieces, 3.0);
    let alpha = 0.1 + 9.9 * rng.uniform();
    let beta = 0.1 + 9.9 * rng.uniform();
    (h, n, alpha, beta)
}

fn quadrature_reports<F>(pool: &Pool, count: usize, check: &'static str, f: F) -> Result<Vec<InequalityReport>, Error>
where
    F: Fn(usize) -> Result<InequalityReport, DiagnosticError> + Sync + Send,
{
    pool.map(count, f).into_iter().map(|r| r.map_err(|e| diag_err(check, e))).collect()
}

/// Unit vector orthogonal to `x`, built from the coordinate axis least
/// aligned with it.
pub fn orthogonal_unit(x: &[f64]) -> Vec<f64> {
    let j = (0..x.len())
        .min_by(|&i, &k| x[i].abs().total_cmp(&x[k].abs()))
        .expect("non-empty point");
    let mut w: Vec<f64> = x.iter().map(|xi| -x[j] * xi).collect();
    w[j] += 1.0;
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    w.iter().map(|v| v / norm).collect()
}

/// Summary statistic for KS comparisons: polar angle on caps, distance to
/// the center elsewhere.
fn summary_fn(s: &Setup) -> impl Fn(&ManifoldPoint) -> f64 + Sync {
    let m = s.manifold;
    let center = s.body.metadata().inner_center;
    let axis = match s.body.shape() {
        BodyShape::SphericalCap { axis, .. } => Some(axis.clone()),
        _ => None,
    };
    move |x: &ManifoldPoint| match &axis {
        Some(a) => polar_angle(a, x),
        None => m.distance(&center, x).unwrap_or(f64::NAN),
    }
}

pub(crate) fn run_check(name: &str, s: &Setup, pool: &Pool) -> Result<Outcome, Error> {
    let d = &s.cfg.diagnose;
    let seed = s.cfg.seed;
    let spec = QuadratureSpec::default();
    let count = d.instances as usize;
    let is_so = matches!(s.manifold, AnyManifold::SpecialOrthogonal(_));
    let reports = match name {
        "affine_needle" => quadrature_reports(pool, count, "affine_needle", |i| {
            let p = affine_instance(&mut instance_rng(seed, 1, i), i);
            check_affine_needle_lemma(p.a, p.b, p.c1, p.c2, p.n, p.eps, &spec)
        })?,
        "kv_needle" => quadrature_reports(pool, count, "kv_needle", |i| {
            let (h, n) = kv_instance(&mut instance_rng(seed, 2, i));
            check_kv_needle_lemma(|z| h.eval(z), h.a, h.b, n, &h.knots, &spec)
        })?,
        "z_logconcavity" => quadrature_reports(pool, count, "z_logconcavity", |i| {
            let (h, n, alpha, beta) = z_instance(&mut instance_rng(seed, 3, i));
            check_partition_function_logconcavity(|x| h.eval(x), h.a, h.b, n, alpha, beta, &h.knots, &spec)
        })?,
        "rev_iso" => {
            let meta = s.body.metadata();
            let eps = d.interior_eps.unwrap_or(meta.inner_radius / (2.0 * s.n() as f64));
            let classifier = InteriorClassifier::LocalConductance {
                trials: d.conductance_trials,
                tolerance: 1e-3,
            };
            let r = check_interior_volume(&s.body, eps, d.mc_samples as usize, classifier, seed, pool)
                .map_err(|e| diag_err(name, e))?;
            vec![r]
        }
        "isoperimetry" => vec![isoperimetry(s, pool)?],
        "one_step" if is_so => return Ok(Outcome::Skipped("no closed-form proposal density on SO(n)".into())),
        "one_step" => one_step(s)?,
        "adjacent_dist" => return adjacent_dist(s, pool),
        "low_temperature_expectation" => return low_temperature(s),
        "tv_decay" => {
            let params = WalkParams::new(s.delta()?, seed, 0);
            let start = StartLaw::PointMass(s.body.metadata().inner_center);
            let replicas = d.replicas as usize;
            let curve = tv_decay_curve(&s.body, &params, &start, &d.checkpoints, replicas, replicas, summary_fn(s), pool)
                .map_err(|e| diag_err(name, e))?;
            let rise = curve.windows(2).map(|w| w[1].ks - w[0].ks).fold(f64::NEG_INFINITY, f64::max);
            let sigma = curve.first().map_or(0.0, |p| p.sigma);
            let mut r = InequalityReport::new("tv_decay", rise.max(0.0), 0.0, sigma, 0.0);
            for p in &curve {
                r = r.with_detail(format!("ks_{}", p.step), p.ks);
            }
            vec![r]
        }
        other => unreachable!("unknown check {other}"),
    };
    Ok(Outcome::Reports(reports))
}

fn isoperimetry(s: &Setup, pool: &Pool) -> Result<InequalityReport, Error> {
    let d = &s.cfg.diagnose;
    let m = s.manifold;
    let run = |partition: &(dyn Fn(&ManifoldPoint) -> Part + Sync), eps: f64| {
        let cfg = IsoperimetryConfig {
            eps,
            mc_samples: d.mc_samples as usize,
            base_point: None,
            separation_pairs: 2_000,
        };
        check_isoperimetry(&s.body, partition, &cfg, s.cfg.seed, pool).map_err(|e| diag_err("isoperimetry", e))
    };
    match s.body.shape() {
        // Slab across the cap: |⟨x, w⟩| < sin θ/4 with w ⟂ axis.
        BodyShape::SphericalCap { axis, angle } => {
            let t = 0.25 * angle.sin();
            run(&slab_partition(orthogonal_unit(&axis.coords), -t, t), sphere_slab_gap(-t, t))
        }
        // Middle quarter of the first coordinate.
        BodyShape::EuclideanBox { lo, hi } => {
            let (mid, width) = (0.5 * (lo[0] + hi[0]), hi[0] - lo[0]);
            let mut w = vec![0.0; lo.len()];
            w[0] = 1.0;
            run(&slab_partition(w, mid - width / 8.0, mid + width / 8.0), width / 4.0)
        }
        // Inner ball, middle shell, outer shell; separated by ρ/3.
        BodyShape::GeodesicBall { center, radius } => {
            let (c, rho) = (center.clone(), *radius);
            let part = move |x: &ManifoldPoint| {
                let r = m.distance(&c, x).unwrap_or(f64::INFINITY);
                if r < rho / 3.0 {
                    Part::K1
                } else if r < 2.0 * rho / 3.0 {
                    Part::K2
                } else {
                    Part::K3
                }
            };
            run(&part, rho / 3.0)
        }
        BodyShape::Oracle { .. } => unreachable!("config bodies are never oracles"),
    }
}

/// TV between one-step kernels at the center and at nearby points: it
/// should shrink as the points approach each other.
fn one_step(s: &Setup) -> Result<Vec<InequalityReport>, Error> {
    let delta = s.delta()?;
    let x = s.body.metadata().inner_center;
    let dir = match s.manifold {
        AnyManifold::Euclidean(_) => {
            let mut v = vec![0.0; x.coords.len()];
            v[0] = 1.0;
            v
        }
        _ => orthogonal_unit(&x.coords),
    };
    let v = TangentVector::new(dir);
    let distances = [0.0, 0.25 * delta, delta];
    let mut tvs = Vec::new();
    for (k, &dist) in distances.iter().enumerate() {
        let y = s.manifold.exp_map(&x, &v.scaled(dist)).map_err(|e| Error::Runtime(format!("one_step: {e}")))?;
        let mut rng = RngStream::derive(s.cfg.seed, domain::PROPOSAL, k as u64);
        let tv = estimate_one_step_tv(&x, &y, &s.body, delta, s.cfg.diagnose.mc_samples as usize, &mut rng)
            .map_err(|e| diag_err("one_step", e))?;
        tvs.push((dist, tv));
    }
    Ok(tvs
        .windows(2)
        .map(|w| {
            let ((d0, a), (d1, b)) = (w[0], w[1]);
            let se = a.tv.stderr.hypot(b.tv.stderr);
            InequalityReport::new("one_step", a.tv.value, b.tv.value, se, 0.0)
                .with_detail("distance_near", d0)
                .with_detail("distance_far", d1)
                .with_detail("rejection_near", a.rejection)
                .with_detail("rejection_far", b.rejection)
                .with_detail("delta", delta)
        })
        .collect())
}

fn adjacent_dist(s: &Setup, pool: &Pool) -> Result<Outcome, Error> {
    let n = s.n();
    if n <= 4 {
        return Ok(Outcome::Skipped(format!(
            "for n = {n} the cooling ratio makes 2/T_hot − 1/T_cold ≤ 0, so the warmness is infinite"
        )));
    }
    let f = s.objective()?;
    let l = s.lipschitz(&f)?;
    let a = s.cfg.anneal.clone().unwrap_or_default();
    let t0 = a.t0.unwrap_or(l * s.body.metadata().diameter);
    if !(t0 > 0.0) {
        return Ok(Outcome::Skipped("constant objective has a trivial schedule".into()));
    }
    let schedule = match make_schedule(t0, n, a.epsilon, a.fail_prob) {
        Ok(sch) if sch.temps.len() >= 2 => sch,
        Ok(_) | Err(_) => return Ok(Outcome::Skipped("schedule has fewer than two temperatures".into())),
    };
    let (th, tc) = (schedule.temps[0], schedule.temps[1]);
    let w = estimate_l2_warmness(&f, &s.body, th, tc, s.cfg.diagnose.mc_samples as usize, s.cfg.seed, pool)
        .map_err(|e| diag_err("adjacent_dist", e))?;
    let r = InequalityReport::new("adjacent_dist", w.estimate.value, 5.0, w.estimate.stderr, 0.0)
        .with_detail("t_hot", th)
        .with_detail("t_cold", tc)
        .with_detail("z_hot", w.z_hot)
        .with_detail("z_cold", w.z_cold)
        .with_detail("z_mix", w.z_mix)
        .with_detail("logconcavity_bound", warmness_bound(n, th, tc));
    Ok(Outcome::Reports(vec![r]))
}

fn low_temperature(s: &Setup) -> Result<Outcome, Error> {
    let f = s.objective()?;
    let Some(min_f) = f.analytic_minimum(&s.body) else {
        return Ok(Outcome::Skipped("target has no known minimum on this body".into()));
    };
    let d = &s.cfg.diagnose;
    let t = d
        .temperature
        .or_else(|| s.cfg.gibbs.as_ref().map(|g| g.temperature))
        .unwrap_or(0.05);
    let l = s.lipschitz(&f)?;
    let target = GibbsTarget::new(f, l, t);
    let params = WalkParams::new(s.delta()?, s.cfg.seed, d.chain_steps);
    let schedule = ChainSchedule {
        burn_in: d.chain_steps / 10,
        thin: 1,
    };
    let out = run_chain(s.body.metadata().inner_center, &s.body, &params, Some(&target), schedule)
        .map_err(|e| Error::Runtime(format!("low_temperature_expectation: {e}")))?;
    let fs: Vec<f64> = out.samples.iter().filter_map(|p| p.f_value).collect();
    let r = check_low_temp_expectation(&fs, t, s.n(), min_f, 50).map_err(|e| diag_err("low_temperature_expectation", e))?;
    Ok(Outcome::Reports(vec![r.with_detail("temperature", t)]))
}
