use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::baselines::CountSearch;
use crate::delta::{build_delta_table, DeltaConfig};
use crate::domains::featsel::{FeatureSelectionDomain, IndexSumOracle, ProcessOracle, RedundancyOracle, RewardOracle};
use crate::domains::synthetic::{SyntheticDomain, SyntheticSpec};
use crate::domains::tictactoe::{MinimaxOracle, TicTacToe, TttState};
use crate::domains::{binomial, Domain, FeatureBag};
use crate::engine::{delta_config, phase_rng, IterationRecord, ProbSearch, Searcher, STREAM_EVAL};
use crate::error::DomainError;
use crate::gaussian::GaussianBelief;
use crate::oracles::exhaustive_best_leaf;
use crate::posterior::Standardizer;

use super::adversarial::{evaluate_adversarial, SearchPolicy};
use super::config::{Experiment, ExperimentConfig, Method, OracleSpec, RunSettings};
use super::HarnessError;

/// One point of one curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub checkpoint: usize,
    pub method: Method,
    pub beta: f64,
    pub repetition: usize,
    pub value: f64,
}

/// Mean and sample standard deviation over repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRecord {
    pub checkpoint: usize,
    pub method: Method,
    pub beta: f64,
    pub runs: usize,
    pub mean: f64,
    pub std: f64,
    pub stderr: f64,
}

/// Mean and sample standard deviation (`n - 1`; zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    (mean, (ss / (n - 1) as f64).sqrt())
}

/// Standard error of a difference of two independent means.
pub fn pooled_se(a: &AggregateRecord, b: &AggregateRecord) -> f64 {
    (a.stderr * a.stderr + b.stderr * b.stderr).sqrt()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BestRecord {
    pub key: String,
    pub reward: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<Vec<u16>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub board: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaSnapshot {
    pub config: DeltaConfig,
    pub entries: Vec<GaussianBelief>,
}

/// Selected features of a finished feature-selection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedFeatures {
    pub features: Vec<u16>,
    pub reward: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub index: usize,
    pub method: Method,
    pub beta: f64,
    pub repetition: usize,
    pub seed: u64,
    pub settings: RunSettings,
    pub delta_table: Option<DeltaSnapshot>,
    pub standardizer: Option<Standardizer>,
    pub pilot_rewards: Vec<f64>,
    pub best: Option<BestRecord>,
    pub selected: Option<SelectedFeatures>,
    pub dag_nodes: usize,
    pub seconds: f64,
    pub trace_file: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimumRecord {
    pub key: String,
    pub reward: f64,
    pub features: Option<Vec<u16>>,
    pub leaves: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub optimum: Option<OptimumRecord>,
    pub checkpoints: Vec<usize>,
    pub runs: Vec<RunRecord>,
    pub failures: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub manifest: Manifest,
    pub results: Vec<ResultRecord>,
    pub aggregates: Vec<AggregateRecord>,
}

impl ExperimentResult {
    pub fn failures(&self) -> usize {
        self.manifest.failures
    }

    pub fn aggregate(&self, method: Method, beta: f64, checkpoint: usize) -> Option<&AggregateRecord> {
        self.aggregates.iter().find(|a| a.method == method && a.beta == beta && a.checkpoint == checkpoint)
    }

    /// Aggregates at `checkpoint` for `method`, one per swept beta.
    pub fn sweep(&self, method: Method, checkpoint: usize) -> Vec<&AggregateRecord> {
        self.aggregates.iter().filter(|a| a.method == method && a.checkpoint == checkpoint).collect()
    }

    /// The swept beta with the highest mean at `checkpoint` (first on ties).
    pub fn best_beta(&self, method: Method, checkpoint: usize) -> Option<&AggregateRecord> {
        self.sweep(method, checkpoint)
            .into_iter()
            .fold(None, |acc: Option<&AggregateRecord>, a| match acc {
                Some(b) if b.mean >= a.mean => Some(b),
                _ => Some(a),
            })
    }
}

/// Identity of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub index: usize,
    pub method: Method,
    pub beta: f64,
    pub repetition: usize,
    pub seed: u64,
}

/// Every (method, beta, repetition) of an experiment, in output order.
pub fn run_specs(config: &ExperimentConfig) -> Vec<RunSpec> {
    let mut out = Vec::new();
    for &method in &config.methods {
        for &beta in config.betas_for(method) {
            for repetition in 0..config.repetitions {
                out.push(RunSpec {
                    index: out.len(),
                    method,
                    beta,
                    repetition,
                    seed: config.base_seed.wrapping_add(repetition as u64),
                });
            }
        }
    }
    out
}

/// What the harness reports about a state.
pub trait DescribeState {
    fn feature_list(&self) -> Option<Vec<u16>> {
        None
    }
    fn board_text(&self) -> Option<String> {
        None
    }
}

impl DescribeState for FeatureBag {
    fn feature_list(&self) -> Option<Vec<u16>> {
        Some(self.features().to_vec())
    }
}

impl DescribeState for TttState {
    fn board_text(&self) -> Option<String> {
        let marks: String = self.cells.iter().map(|&c| ['.', 'X', 'O'][c as usize]).collect();
        Some(format!("{} {} {}", &marks[0..3], &marks[3..6], &marks[6..9]))
    }
}

/// The best terminal bag seen, if it has the requested size.
pub fn report_pixels<S: Searcher<FeatureBag> + ?Sized>(searcher: &S, k: usize) -> Option<SelectedFeatures> {
    let best = searcher.best()?;
    (best.state.len() == k).then(|| SelectedFeatures { features: best.state.features().to_vec(), reward: best.reward })
}

type Evaluator<'a, S> = &'a (dyn Fn(&dyn Searcher<S>, &mut ChaCha8Rng) -> Result<f64, DomainError> + Sync);

pub fn build_searcher<'d, D: Domain>(domain: &'d D, settings: &RunSettings) -> crate::Result<Box<dyn Searcher<D::State> + 'd>> {
    Ok(match settings {
        RunSettings::Prob(c) => Box::new(ProbSearch::new(domain, *c)?),
        RunSettings::Count(c) => Box::new(CountSearch::new(domain, *c)?),
    })
}

struct RunOutput {
    record: RunRecord,
    curve: Vec<ResultRecord>,
}

fn trace_csv(trace: &[IterationRecord]) -> Result<Vec<u8>, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if trace.is_empty() {
        w.write_record(["iteration", "boundary", "terminal", "path_len", "raw_reward", "standardized_reward", "best_so_far"])?;
    }
    for rec in trace {
        w.serialize(rec)?;
    }
    w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))
}

fn trace_name(spec: &RunSpec) -> String {
    format!("run{:04}_{}_beta{}_rep{}.csv", spec.index, spec.method, spec.beta, spec.repetition)
}

fn execute_run<D: Domain>(
    domain: &D,
    config: &ExperimentConfig,
    spec: RunSpec,
    settings: RunSettings,
    evaluator: Option<Evaluator<'_, D::State>>,
    trace_dir: Option<&Path>,
) -> RunOutput
where
    D::State: DescribeState,
{
    let start = Instant::now();
    let mut record = RunRecord {
        index: spec.index,
        method: spec.method,
        beta: spec.beta,
        repetition: spec.repetition,
        seed: spec.seed,
        settings,
        delta_table: None,
        standardizer: None,
        pilot_rewards: Vec::new(),
        best: None,
        selected: None,
        dag_nodes: 0,
        seconds: 0.0,
        trace_file: None,
        error: None,
    };
    let mut curve = Vec::new();
    let outcome = catch_unwind(AssertUnwindSafe(|| -> Result<(), HarnessError> {
        if let RunSettings::Prob(c) = &settings {
            let cfg = delta_config(domain, c);
            let table = build_delta_table(cfg.clone()).map_err(|e| HarnessError::Search(e.to_string()))?;
            record.delta_table = Some(DeltaSnapshot { config: cfg, entries: table.entries().to_vec() });
        }
        let mut searcher = build_searcher(domain, &settings).map_err(|e| HarnessError::Search(e.to_string()))?;
        record.standardizer = Some(searcher.standardizer());
        record.pilot_rewards = searcher.pilot_rewards().to_vec();
        let mut eval_rng = phase_rng(spec.seed, STREAM_EVAL);
        let mut trace = Vec::with_capacity(config.budget);
        let mut failure = None;
        'outer: for checkpoint in config.checkpoints() {
            while searcher.iterations() < checkpoint {
                match searcher.step() {
                    Ok(r) => trace.push(r),
                    Err(e) => {
                        failure = Some(HarnessError::Search(e.to_string()));
                        break 'outer;
                    }
                }
            }
            let value = match evaluator {
                Some(eval) => eval(searcher.as_ref(), &mut eval_rng)?,
                None => searcher.best().map_or(f64::NEG_INFINITY, |b| b.reward),
            };
            curve.push(ResultRecord { checkpoint, method: spec.method, beta: spec.beta, repetition: spec.repetition, value });
        }
        record.dag_nodes = searcher.dag().len();
        record.best = searcher.best().map(|b| BestRecord {
            key: b.key.to_hex(),
            reward: b.reward,
            features: b.state.feature_list(),
            board: b.state.board_text(),
        });
        if config.experiment == Experiment::Featsel {
            record.selected = record
                .best
                .as_ref()
                .and_then(|b| b.features.clone().filter(|f| f.len() == config.featsel.subset_size).map(|features| SelectedFeatures { features, reward: b.reward }));
        }
        if let Some(dir) = trace_dir {
            let name = trace_name(&spec);
            std::fs::write(dir.join(&name), trace_csv(&trace)?).map_err(|e| HarnessError::Io(format!("{name}: {e}")))?;
            record.trace_file = Some(format!("traces/{name}"));
        }
        failure.map_or(Ok(()), Err)
    }));
    record.error = match outcome {
        Ok(Ok(())) => None,
        Ok(Err(e)) => Some(e.to_string()),
        Err(panic) => Some(format!(
            "panic: {}",
            panic.downcast_ref::<String>().cloned().or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
        )),
    };
    if let Some(e) = &record.error {
        log::error!("run {} ({} beta {} rep {}) failed: {e}", spec.index, spec.method, spec.beta, spec.repetition);
        curve.clear();
    }
    record.seconds = start.elapsed().as_secs_f64();
    RunOutput { record, curve }
}

fn run_all<D: Domain>(
    domain: &D,
    config: &ExperimentConfig,
    specs: &[RunSpec],
    evaluator: Option<Evaluator<'_, D::State>>,
    trace_dir: Option<&Path>,
) -> Result<Vec<RunOutput>, HarnessError>
where
    D::State: DescribeState,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        specs
            .par_iter()
            .map(|spec| {
                let out = execute_run(domain, config, *spec, config.settings(spec.method, spec.beta, spec.seed), evaluator, trace_dir);
                log::info!("run {} {} beta {} rep {} done in {:.2}s", spec.index, spec.method, spec.beta, spec.repetition, out.record.seconds);
                out
            })
            .collect()
    }))
}

pub fn synthetic_domain(config: &ExperimentConfig) -> Result<SyntheticDomain, HarnessError> {
    let p = &config.synthetic;
    SyntheticDomain::from_spec(SyntheticSpec { n_features: p.n_features, bag_size: p.bag_size, ground_truth_seed: p.ground_truth_seed })
        .map_err(HarnessError::from)
}

pub fn featsel_domain(config: &ExperimentConfig) -> Result<FeatureSelectionDomain, HarnessError> {
    let p = &config.featsel;
    let oracle: Box<dyn RewardOracle> = match &p.oracle {
        OracleSpec::Redundancy { width, height } => Box::new(RedundancyOracle::new(*width, *height)),
        OracleSpec::IndexSum => Box::new(IndexSumOracle),
        OracleSpec::Process { program, args, deterministic } => Box::new(ProcessOracle::spawn(program, args, *deterministic)?),
    };
    FeatureSelectionDomain::new(p.n_features, p.subset_size, oracle).map_err(HarnessError::from)
}

/// Best leaf by enumeration, when the leaf count allows it.
pub fn optimum<D: Domain>(domain: &D, leaf_count: f64, limit: usize) -> Result<Option<OptimumRecord>, HarnessError>
where
    D::State: DescribeState,
{
    if leaf_count > limit as f64 {
        return Ok(None);
    }
    let best = exhaustive_best_leaf(domain, limit)?;
    Ok(Some(OptimumRecord { key: best.key.to_hex(), reward: best.reward, features: best.state.feature_list(), leaves: best.leaves }))
}

fn outputs_for<D: Domain>(
    domain: &D,
    config: &ExperimentConfig,
    evaluator: Option<Evaluator<'_, D::State>>,
    trace_dir: Option<&Path>,
) -> Result<Vec<RunOutput>, HarnessError>
where
    D::State: DescribeState,
{
    run_all(domain, config, &run_specs(config), evaluator, trace_dir)
}

/// Runs every configured run; writes per-run traces into `trace_dir` when
/// given. Failed runs are recorded in the manifest and counted.
pub fn execute_experiment(config: &ExperimentConfig, trace_dir: Option<&Path>) -> Result<ExperimentResult, HarnessError> {
    config.validate()?;
    let start = Instant::now();
    let (outputs, optimum) = match config.experiment {
        Experiment::Synthetic => {
            let d = synthetic_domain(config)?;
            let leaves = binomial(config.synthetic.n_features, config.synthetic.bag_size);
            let opt = optimum(&d, leaves, 1_000_000)?;
            (outputs_for(&d, config, None, trace_dir)?, opt)
        }
        Experiment::Tictactoe => {
            let d = TicTacToe::new();
            let oracle = MinimaxOracle::new();
            let games = config.eval_games;
            let eval = move |s: &dyn Searcher<TttState>, rng: &mut ChaCha8Rng| evaluate_adversarial(&SearchPolicy(s), &oracle, games, rng);
            (outputs_for(&d, config, Some(&eval), trace_dir)?, None)
        }
        Experiment::Featsel => {
            let d = featsel_domain(config)?;
            let opt = match config.featsel.oracle {
                OracleSpec::Process { .. } => None,
                _ => optimum(&d, binomial(config.featsel.n_features, config.featsel.subset_size), config.featsel.exhaustive_limit)?,
            };
            (outputs_for(&d, config, None, trace_dir)?, opt)
        }
    };
    let mut results = Vec::new();
    let mut runs = Vec::with_capacity(outputs.len());
    for out in outputs {
        results.extend(out.curve);
        runs.push(out.record);
    }
    let aggregates = aggregate(config, &results);
    let failures = runs.iter().filter(|r| r.error.is_some()).count();
    Ok(ExperimentResult {
        manifest: Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            optimum,
            checkpoints: config.checkpoints(),
            runs,
            failures,
            seconds: start.elapsed().as_secs_f64(),
        },
        results,
        aggregates,
    })
}

/// Groups the raw records by (method, beta, checkpoint) in configuration
/// order.
pub fn aggregate(config: &ExperimentConfig, results: &[ResultRecord]) -> Vec<AggregateRecord> {
    let mut groups: HashMap<(Method, u64, usize), Vec<f64>> = HashMap::new();
    for r in results {
        groups.entry((r.method, r.beta.to_bits(), r.checkpoint)).or_default().push(r.value);
    }
    let mut out = Vec::new();
    for &method in &config.methods {
        for &beta in config.betas_for(method) {
            for checkpoint in config.checkpoints() {
                if let Some(values) = groups.get(&(method, beta.to_bits(), checkpoint)) {
                    let (mean, std) = mean_std(values);
                    out.push(AggregateRecord {
                        checkpoint,
                        method,
                        beta,
                        runs: values.len(),
                        mean,
                        std,
                        stderr: std / (values.len() as f64).sqrt(),
                    });
                }
            }
        }
    }
    out
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    if rows.is_empty() {
        w.write_record(header)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| HarnessError::Io(e.to_string()))
}

/// Writes `results.csv`, `aggregates.csv` and `manifest.json` into `dir`.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
    write_csv(&dir.join("results.csv"), &result.results, &["checkpoint", "method", "beta", "repetition", "value"])?;
    write_csv(&dir.join("aggregates.csv"), &result.aggregates, &["checkpoint", "method", "beta", "runs", "mean", "std", "stderr"])?;
    let json = serde_json::to_string_pretty(&result.manifest).map_err(|e| HarnessError::Io(e.to_string()))?;
    std::fs::write(dir.join("manifest.json"), json).map_err(|e| HarnessError::Io(e.to_string()))
}

/// Runs the experiment and writes every output under `config.output`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    let dir = &config.output;
    let trace_dir = dir.join("traces");
    if config.write_traces {
        std::fs::create_dir_all(&trace_dir).map_err(|e| HarnessError::Io(format!("{}: {e}", trace_dir.display())))?;
    }
    let result = execute_experiment(config, config.write_traces.then_some(trace_dir.as_path()))?;
    write_outputs(&result, dir)?;
    Ok(result)
}

/// Reads a manifest back.
pub fn load_manifest(path: &Path) -> Result<Manifest, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone)]
pub struct Replay {
    pub record: RunRecord,
    pub curve: Vec<ResultRecord>,
    pub trace_path: PathBuf,
}

/// Re-executes run `index` of a manifest from the recorded configuration
/// and settings alone, writing its trace into `out_dir`.
pub fn replay_run(manifest: &Manifest, index: usize, out_dir: &Path) -> Result<Replay, HarnessError> {
    let run = manifest
        .runs
        .iter()
        .find(|r| r.index == index)
        .ok_or_else(|| HarnessError::Config(format!("manifest has no run {index}")))?;
    let config = &manifest.config;
    let spec = RunSpec { index, method: run.method, beta: run.beta, repetition: run.repetition, seed: run.seed };
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::Io(format!("{}: {e}", out_dir.display())))?;
    let out = match config.experiment {
        Experiment::Synthetic => execute_run(&synthetic_domain(config)?, config, spec, run.settings, None, Some(out_dir)),
        Experiment::Tictactoe => {
            let oracle = MinimaxOracle::new();
            let games = config.eval_games;
            let eval = move |s: &dyn Searcher<TttState>, rng: &mut ChaCha8Rng| evaluate_adversarial(&SearchPolicy(s), &oracle, games, rng);
            execute_run(&TicTacToe::new(), config, spec, run.settings, Some(&eval), Some(out_dir))
        }
        Experiment::Featsel => execute_run(&featsel_domain(config)?, config, spec, run.settings, None, Some(out_dir)),
    };
    if let Some(e) = &out.record.error {
        return Err(HarnessError::Search(e.clone()));
    }
    Ok(Replay { trace_path: out_dir.join(trace_name(&spec)), record: out.record, curve: out.curve })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(experiment: Experiment) -> ExperimentConfig {
        let mut c = ExperimentConfig::defaults(experiment);
        c.repetitions = 2;
        c.budget = 20;
        c.checkpoint_every = 10;
        c.betas = vec![1.0];
        c.threads = 2;
        c.eval_games = 4;
        c
    }

    #[test]
    fn statistics() {
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 2f64.sqrt()));
        assert_eq!(mean_std(&[5.0]), (5.0, 0.0));
    }

    #[test]
    fn zero_budget_gives_empty_curves() {
        let mut c = small(Experiment::Synthetic);
        c.repetitions = 1;
        c.budget = 0;
        let r = execute_experiment(&c, None).unwrap();
        assert!(r.results.is_empty() && r.aggregates.is_empty());
        assert_eq!(r.failures(), 0);
        assert_eq!(r.manifest.runs.len(), c.methods.len());
        assert_eq!(r.manifest.optimum.as_ref().unwrap().leaves, 3003);
    }

    #[test]
    fn curves_are_nondecreasing_and_complete() {
        let c = small(Experiment::Synthetic);
        let r = execute_experiment(&c, None).unwrap();
        assert_eq!(r.results.len(), c.methods.len() * 2 * 2);
        for run in r.results.chunks(2) {
            assert!(run[0].value <= run[1].value);
        }
        let agg = r.aggregate(Method::Uct, 1.0, 20).unwrap();
        assert_eq!(agg.runs, 2);
    }

    #[test]
    fn adversarial_curves_are_bounded() {
        let mut c = small(Experiment::Tictactoe);
        c.methods = vec![Method::ProbDag, Method::Ucd];
        let r = execute_experiment(&c, None).unwrap();
        assert_eq!(r.failures(), 0);
        assert!(r.results.iter().all(|x| (-1.0..=1.0).contains(&x.value)));
    }

    #[test]
    fn featsel_reports_pixels() {
        let mut c = small(Experiment::Featsel);
        c.featsel.n_features = 5;
        c.featsel.subset_size = 2;
        c.featsel.oracle = OracleSpec::IndexSum;
        c.prob.pilot_rollouts = 2;
        c.count.pilot_rollouts = 2;
        c.budget = 10;
        let r = execute_experiment(&c, None).unwrap();
        assert_eq!(r.failures(), 0);
        assert_eq!(r.manifest.optimum.as_ref().unwrap().features, Some(vec![3, 4]));
        for run in &r.manifest.runs {
            // ten leaves, ten iterations plus pilots: every method finds it
            assert_eq!(run.selected.as_ref().unwrap().features.len(), 2);
        }
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        let mut c = small(Experiment::Featsel);
        c.featsel.n_features = 5;
        c.featsel.subset_size = 2;
        c.featsel.oracle = OracleSpec::Process { program: "/nonexistent/oracle".into(), args: vec![], deterministic: true };
        assert!(execute_experiment(&c, None).is_err());
        c.featsel.oracle = OracleSpec::Process { program: "true".into(), args: vec![], deterministic: true };
        c.methods = vec![Method::Uct];
        let r = execute_experiment(&c, None).unwrap();
        assert_eq!(r.failures(), 2);
        assert!(r.manifest.runs.iter().all(|x| x.error.as_deref().is_some_and(|e| e.contains("oracle"))));
    }
}
