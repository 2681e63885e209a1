//! Mode drivers and output writers.
//!
//! Files written to the output directory:
//!
//! * `samples.jsonl` — one chain sample (sample mode) or one trial minimizer
//!   (anneal mode) per line.
//! * `trace.csv` — per-chain rejection statistics (sample mode) or per-phase
//!   annealing records (anneal mode).
//! * `reports.jsonl` — one inequality report per line (diagnose mode).
//!
//! Every row carries `config_hash`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use geowalk_core::anneal::{anneal_trials, AnnealConfig, AnnealError, StepsPerPhase};
use geowalk_core::body::ConvexBody;
use geowalk_core::exec::Executor;
use geowalk_core::manifold::{AnyManifold, Manifold, ManifoldPoint};
use geowalk_core::rng::{domain, RngStream};
use geowalk_core::target::{GibbsTarget, Objective};
use geowalk_core::walker::{
    default_burn_in, delta_bound, run_chain_with, validate_delta, ChainSchedule, WalkError, WalkParams,
};
use serde::Serialize;

use crate::builtins::{parse_body, parse_manifold, parse_point, parse_target};
use crate::config::{Mode, RunConfig, StepsSetting};
use crate::{suite, Error, Pool};

/// What a run reports back to the caller.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub line: String,
    /// Some diagnostic check failed.
    pub failed: bool,
}

/// Parsed config plus the objects every mode needs.
pub(crate) struct Setup<'a> {
    pub cfg: &'a RunConfig,
    pub manifold: AnyManifold,
    pub body: ConvexBody,
    pub hash: String,
}

impl Setup<'_> {
    pub fn n(&self) -> usize {
        self.manifold.descriptor().intrinsic_dim
    }

    /// Configured step size, or the admissible bound with `s = 0.5`.
    pub fn delta(&self) -> Result<f64, Error> {
        let meta = self.body.metadata();
        let bound = delta_bound(&self.manifold.descriptor(), meta.inner_radius, 0.5);
        let Some(delta) = self.cfg.walk.delta else {
            return Ok(bound);
        };
        match validate_delta(delta, bound, self.cfg.walk.override_delta) {
            Ok(Some(w)) => {
                eprintln!("warning: walk.delta = {} exceeds the admissible bound {}", w.delta, w.bound);
                Ok(delta)
            }
            Ok(None) => Ok(delta),
            Err(WalkError::DeltaTooLarge { delta, bound }) => Err(Error::Config(format!(
                "walk.delta: {delta} exceeds the admissible bound {bound}; set walk.override_delta or pass --override-delta"
            ))),
            Err(e) => Err(Error::Config(format!("walk.delta: {e}"))),
        }
    }

    /// Objective named by `[anneal] target`, then `[gibbs] target`, else the
    /// distance to the body's center.
    pub fn objective(&self) -> Result<Objective, Error> {
        let spec = self.cfg.anneal.as_ref().and_then(|a| a.target.as_ref()).map(|t| ("anneal.target", t));
        match spec.or_else(|| self.cfg.gibbs.as_ref().map(|g| ("gibbs.target", &g.target))) {
            Some((field, t)) => parse_target(field, t, &self.body),
            None => Ok(Objective::DistanceTo(self.body.metadata().inner_center)),
        }
    }

    /// Lipschitz constant: explicit config value, else the objective's own.
    pub fn lipschitz(&self, objective: &Objective) -> Result<f64, Error> {
        let explicit = self
            .cfg
            .anneal
            .as_ref()
            .and_then(|a| a.lipschitz)
            .or_else(|| self.cfg.gibbs.as_ref().and_then(|g| g.lipschitz));
        explicit
            .or_else(|| objective.lipschitz_on(&self.body))
            .ok_or_else(|| Error::Config("gibbs.lipschitz: required for this target".into()))
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Error> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.display().to_string(), source }
}

fn write_jsonl<T: Serialize>(w: &mut impl Write, row: &T, path: &Path) -> Result<(), Error> {
    serde_json::to_writer(&mut *w, row).map_err(|e| Error::Runtime(e.to_string()))?;
    w.write_all(b"\n").map_err(io(path))
}

/// Runs the configured mode, writing outputs under `out_dir`.
pub fn execute(cfg: &RunConfig, out_dir: &Path, pool: &Pool) -> Result<Summary, Error> {
    let manifold = parse_manifold(&cfg.manifold, cfg.curvature_bound, cfg.injectivity_radius)?;
    let body = parse_body(&cfg.body, &manifold)?;
    if cfg.walk.thin == 0 {
        return Err(Error::Config("walk.thin: must be ≥ 1".into()));
    }
    let setup = Setup { cfg, manifold, body, hash: cfg.hash() };
    fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    match cfg.mode {
        Mode::Sample => sample(&setup, out_dir, pool),
        Mode::Anneal => anneal(&setup, out_dir, pool),
        Mode::Diagnose => diagnose(&setup, out_dir, pool),
    }
}

#[derive(Serialize)]
struct SampleRow<'a> {
    config_hash: &'a str,
    chain: usize,
    step: u64,
    coords: &'a [f64],
    rejected: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    f_value: Option<f64>,
}

fn sample(s: &Setup, out_dir: &Path, pool: &Pool) -> Result<Summary, Error> {
    let w = &s.cfg.walk;
    let delta = s.delta()?;
    let target = match &s.cfg.gibbs {
        Some(g) => {
            if !(g.temperature > 0.0) {
                return Err(Error::Config("gibbs.temperature: must be > 0".into()));
            }
            let f = parse_target("gibbs.target", &g.target, &s.body)?;
            let l = s.lipschitz(&f)?;
            Some(GibbsTarget::new(f, l, g.temperature))
        }
        None => None,
    };
    let center = s.body.metadata().inner_center;
    let fixed_start: Option<ManifoldPoint> = match w.start.as_str() {
        "uniform" => None,
        spec => {
            let p = parse_point("walk.start", spec, &s.manifold, Some(&center))?;
            if !s.body.contains(&p).unwrap_or(false) {
                return Err(Error::Config(format!("walk.start: {spec:?} is not in the body")));
            }
            Some(p)
        }
    };
    let burn_in = w.burn_in.unwrap_or_else(|| default_burn_in(s.n(), delta));
    if burn_in >= w.max_steps && w.max_steps > 0 {
        eprintln!("warning: burn-in {burn_in} ≥ max_steps {}; no samples will be emitted", w.max_steps);
    }
    let params = WalkParams {
        delta,
        seed: s.cfg.seed,
        max_steps: w.max_steps,
        record_rejections: w.record_rejections,
    };
    let schedule = ChainSchedule { burn_in, thin: w.thin };
    let outputs = pool.map(w.chains as usize, |i| {
        let mut rng = RngStream::derive(s.cfg.seed, domain::CHAIN, i as u64);
        let start = match &fixed_start {
            Some(p) => p.clone(),
            None => s.body.rejection_sample_uniform(&mut rng)?,
        };
        run_chain_with(start, &s.body, &params, target.as_ref(), schedule, &mut rng)
    });

    let samples_path = out_dir.join("samples.jsonl");
    let trace_path = out_dir.join("trace.csv");
    let mut samples = create(out_dir, "samples.jsonl")?;
    let mut trace = create(out_dir, "trace.csv")?;
    writeln!(trace, "config_hash,chain,steps,outside,filtered,cut_locus,rejection_fraction").map_err(io(&trace_path))?;
    let (mut emitted, mut steps, mut rejections) = (0, 0, 0);
    for (chain, out) in outputs.into_iter().enumerate() {
        let out = out.map_err(|e| Error::Runtime(format!("chain {chain}: {e}")))?;
        for smp in &out.samples {
            let row = SampleRow {
                config_hash: &s.hash,
                chain,
                step: smp.step,
                coords: &smp.point.coords,
                rejected: smp.rejected,
                f_value: smp.f_value,
            };
            write_jsonl(&mut samples, &row, &samples_path)?;
        }
        let st = out.stats;
        writeln!(
            trace,
            "{},{chain},{},{},{},{},{}",
            s.hash,
            st.steps,
            st.outside,
            st.filtered,
            st.cut_locus,
            st.rejection_fraction()
        )
        .map_err(io(&trace_path))?;
        emitted += out.samples.len();
        steps += st.steps;
        rejections += st.rejections();
    }
    samples.flush().map_err(io(&samples_path))?;
    trace.flush().map_err(io(&trace_path))?;
    let frac = if steps == 0 { 0.0 } else { rejections as f64 / steps as f64 };
    Ok(Summary {
        line: format!(
            "sample: {} chain(s), {emitted} samples, delta {delta:.6}, rejection fraction {frac:.4} [config {}]",
            w.chains, s.hash
        ),
        failed: false,
    })
}

#[derive(Serialize)]
struct MinimizerRow<'a> {
    config_hash: &'a str,
    trial: usize,
    coords: &'a [f64],
    value: f64,
    phases: usize,
    delta: f64,
}

fn anneal(s: &Setup, out_dir: &Path, pool: &Pool) -> Result<Summary, Error> {
    let a = s
        .cfg
        .anneal
        .clone()
        .unwrap_or_default();
    let objective = s.objective()?;
    let steps_per_phase = match &a.steps_per_phase {
        None => StepsPerPhase::Auto,
        Some(StepsSetting::Named(n)) if n == "auto" => StepsPerPhase::Auto,
        Some(StepsSetting::Named(n)) => {
            return Err(Error::Config(format!("anneal.steps_per_phase: expected \"auto\" or an integer, found {n:?}")))
        }
        Some(StepsSetting::Fixed(k)) => StepsPerPhase::Fixed(*k),
    };
    let config = AnnealConfig {
        epsilon: a.epsilon,
        fail_prob: a.fail_prob,
        steps_per_phase,
        lipschitz: Some(s.lipschitz(&objective)?),
        budget_constant: a.budget_constant,
        global_budget: a.global_budget,
        delta: Some(s.delta()?),
        t0: a.t0,
    };
    let results = anneal_trials(&s.body, &objective, &config, s.cfg.seed, a.trials as usize, pool);

    let samples_path = out_dir.join("samples.jsonl");
    let trace_path = out_dir.join("trace.csv");
    let mut samples = create(out_dir, "samples.jsonl")?;
    let mut trace = create(out_dir, "trace.csv")?;
    writeln!(trace, "config_hash,trial,phase,T,steps,rejections,best_f,final_f,budget_capped").map_err(io(&trace_path))?;
    let mut values = Vec::with_capacity(results.len());
    for (trial, r) in results.into_iter().enumerate() {
        let r = r.map_err(|e| match e {
            AnnealError::InvalidParameter(m) => Error::Config(format!("anneal: {m}")),
            e => Error::Runtime(format!("trial {trial}: {e}")),
        })?;
        for p in &r.trace {
            writeln!(
                trace,
                "{},{trial},{},{},{},{},{},{},{}",
                s.hash, p.phase, p.temperature, p.steps, p.rejections, p.best_f, p.final_f, p.budget_capped
            )
            .map_err(io(&trace_path))?;
        }
        let row = MinimizerRow {
            config_hash: &s.hash,
            trial,
            coords: &r.minimizer.coords,
            value: r.value,
            phases: r.schedule.phases,
            delta: r.delta,
        };
        write_jsonl(&mut samples, &row, &samples_path)?;
        values.push(r.value);
    }
    samples.flush().map_err(io(&samples_path))?;
    trace.flush().map_err(io(&trace_path))?;
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    let within = values.iter().filter(|&&v| v <= a.epsilon).count();
    Ok(Summary {
        line: format!(
            "anneal: {} trial(s), best value {best:.6}, {within} within epsilon {} [config {}]",
            values.len(),
            a.epsilon,
            s.hash
        ),
        failed: false,
    })
}

fn diagnose(s: &Setup, out_dir: &Path, pool: &Pool) -> Result<Summary, Error> {
    let path = out_dir.join("reports.jsonl");
    let mut out = create(out_dir, "reports.jsonl")?;
    let checks = suite::selected_checks(&s.cfg.diagnose.checks)?;
    let (mut total, mut failed) = (0, 0);
    let mut skipped = Vec::new();
    for name in checks {
        match suite::run_check(name, s, pool)? {
            suite::Outcome::Reports(reports) => {
                for (i, rep) in reports.iter().enumerate() {
                    let row = suite::ReportRow {
                        config_hash: &s.hash,
                        check: name,
                        instance: i,
                        report: rep,
                    };
                    write_jsonl(&mut out, &row, &path)?;
                    total += 1;
                    failed += usize::from(!rep.passed);
                }
            }
            suite::Outcome::Skipped(why) => {
                eprintln!("note: skipping {name}: {why}");
                skipped.push(name);
            }
        }
    }
    out.flush().map_err(io(&path))?;
    let mut line = format!("diagnose: {total} reports, {} passed, {failed} failed", total - failed);
    if !skipped.is_empty() {
        line.push_str(&format!(", skipped {}", skipped.join(" ")));
    }
    line.push_str(&format!(" [config {}]", s.hash));
    Ok(Summary { line, failed: failed > 0 })
}
