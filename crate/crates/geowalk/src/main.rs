use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use geowalk::builtins::list_builtins;
use geowalk::config::AnnealSection;
use geowalk::{execute, Error, Mode, Pool, RunConfig};

#[derive(Parser)]
#[command(name = "geowalk", version, about = "Geodesic random walks, Gibbs sampling and annealing on manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the mode named in the config file.
    Run(RunArgs),
    /// Draw samples with the geodesic (or Metropolis) walk.
    Sample(RunArgs),
    /// Minimize the target by simulated annealing.
    Anneal(RunArgs),
    /// Run the diagnostic checks; exits 1 if any fails.
    Diagnose(RunArgs),
    /// Print the built-in manifolds, bodies, targets and checks.
    ListBuiltins,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, short)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Overrides `output` from the config.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Accept a step size above the admissible bound (with a warning).
    #[arg(long)]
    override_delta: bool,
    #[arg(long)]
    budget_constant: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    fail_prob: Option<f64>,
}

fn load(args: &RunArgs, mode: Option<Mode>) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| Error::Io {
        path: args.config.display().to_string(),
        source,
    })?;
    let mut cfg = RunConfig::from_toml(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", args.config.display())))?;
    if let Some(m) = mode {
        cfg.mode = m;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.walk.override_delta |= args.override_delta;
    let anneal_flags = args.budget_constant.is_some() || args.trials.is_some() || args.epsilon.is_some() || args.fail_prob.is_some();
    if anneal_flags {
        let a = cfg.anneal.get_or_insert_with(AnnealSection::default);
        if let Some(v) = args.budget_constant {
            a.budget_constant = v;
        }
        if let Some(v) = args.trials {
            a.trials = v;
        }
        if let Some(v) = args.epsilon {
            a.epsilon = v;
        }
        if let Some(v) = args.fail_prob {
            a.fail_prob = v;
        }
    }
    Ok(cfg)
}

fn run(args: &RunArgs, mode: Option<Mode>) -> Result<bool, Error> {
    let cfg = load(args, mode)?;
    let out_dir = match &args.output_dir {
        Some(d) => d.clone(),
        None => Path::new(&cfg.output).to_path_buf(),
    };
    let pool = Pool::new(args.jobs)?;
    let summary = execute(&cfg, &out_dir, &pool)?;
    println!("{}", summary.line);
    Ok(!summary.failed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, mode) = match &cli.command {
        Command::ListBuiltins => {
            print!("{}", list_builtins());
            return ExitCode::SUCCESS;
        }
        Command::Run(a) => (a, None),
        Command::Sample(a) => (a, Some(Mode::Sample)),
        Command::Anneal(a) => (a, Some(Mode::Anneal)),
        Command::Diagnose(a) => (a, Some(Mode::Diagnose)),
    };
    match run(args, mode) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            match e {
                Error::Config(_) => eprintln!("config error: {e}"),
                _ => eprintln!("error: {e}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
