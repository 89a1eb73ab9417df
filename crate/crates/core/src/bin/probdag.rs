use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use probdag::harness::{
    load_manifest, replay_run, run_experiment, validate_math, Experiment, ExperimentConfig, HarnessError, Method,
};

#[derive(Parser)]
#[command(name = "probdag", version, about = "Probabilistic DAG search experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration; missing keys take the experiment defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base seed (repetition r uses seed + r)
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    reps: Option<usize>,
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Comma-separated, e.g. prob-dag,uct,ucd
    #[arg(long, global = true, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Comma-separated exploration constants to sweep
    #[arg(long, global = true, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    /// Worker threads (0 = all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Synthetic feature-bag DAG with known covariance
    Synthetic,
    /// Tic-Tac-Toe against the exact minimax opponent
    Tictactoe,
    /// Feature subset selection
    Featsel,
    /// Monte-Carlo checks of the extremal moments and the increment table
    ValidateMath,
    /// Re-execute one run of a manifest and compare its trace
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        run: usize,
    },
}

fn experiment_config(common: &Common, experiment: Experiment) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::defaults(experiment),
    };
    if cfg.experiment != experiment {
        return Err(HarnessError::Config(format!(
            "config is for {}, command is {}",
            cfg.experiment.as_str(),
            experiment.as_str()
        )));
    }
    if let Some(v) = &common.out {
        cfg.output = v.clone();
    }
    if let Some(v) = common.seed {
        cfg.base_seed = v;
    }
    if let Some(v) = common.reps {
        cfg.repetitions = v;
    }
    if let Some(v) = common.budget {
        cfg.budget = v;
    }
    if let Some(v) = &common.methods {
        cfg.methods = v.clone();
    }
    if let Some(v) = &common.betas {
        cfg.betas = v.clone();
        cfg.overrides.values_mut().for_each(|o| o.betas = None);
    }
    if let Some(v) = common.threads {
        cfg.threads = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool, HarnessError> {
    let experiment = match cli.command {
        Command::Synthetic => Experiment::Synthetic,
        Command::Tictactoe => Experiment::Tictactoe,
        Command::Featsel => Experiment::Featsel,
        Command::ValidateMath => {
            let mut ok = true;
            for check in validate_math(cli.common.seed.unwrap_or(0)) {
                println!("{} {}: {}", if check.passed { "PASS" } else { "FAIL" }, check.name, check.detail);
                ok &= check.passed;
            }
            return Ok(ok);
        }
        Command::Replay { manifest, run } => {
            let m = load_manifest(&manifest)?;
            let out = cli.common.out.unwrap_or_else(|| PathBuf::from("replay"));
            let replay = replay_run(&m, run, &out)?;
            let fresh = std::fs::read(&replay.trace_path).map_err(|e| HarnessError::Io(e.to_string()))?;
            println!("replayed run {run} -> {}", replay.trace_path.display());
            let original = m.runs.iter().find(|r| r.index == run).and_then(|r| r.trace_file.clone());
            return match original {
                Some(rel) => {
                    let path = manifest.parent().unwrap_or(std::path::Path::new(".")).join(rel);
                    let same = std::fs::read(&path).map(|o| o == fresh).unwrap_or(false);
                    println!("{} {}", if same { "identical to" } else { "DIFFERS from" }, path.display());
                    Ok(same)
                }
                None => Ok(true),
            };
        }
    };
    let cfg = experiment_config(&cli.common, experiment)?;
    let result = run_experiment(&cfg)?;
    let last = *result.manifest.checkpoints.last().unwrap_or(&0);
    if let Some(opt) = &result.manifest.optimum {
        println!("optimum reward {:.6} ({} leaves)", opt.reward, opt.leaves);
    }
    println!("{:<22}{:>10}{:>12}{:>12}  (checkpoint {last})", "method", "beta", "mean", "std");
    for a in result.aggregates.iter().filter(|a| a.checkpoint == last) {
        println!("{:<22}{:>10.4}{:>12.5}{:>12.5}", a.method.as_str(), a.beta, a.mean, a.std);
    }
    println!("outputs in {}", cfg.output.display());
    if result.failures() > 0 {
        eprintln!("{} of {} runs failed; see manifest.json", result.failures(), result.manifest.runs.len());
    }
    Ok(result.failures() == 0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
