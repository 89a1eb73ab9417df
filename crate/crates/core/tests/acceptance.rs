//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Criteria 1-3, 8 and 9 run by default. The experiment criteria (4-7) take
//! several minutes each in release mode and only run with
//! `ACCEPTANCE_FULL=1`; otherwise they print SKIP. The process exits
//! nonzero if any executed criterion fails.
//!
//!     ACCEPTANCE_FULL=1 cargo test --release --test acceptance

use std::collections::{BTreeSet, VecDeque};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use probdag::domains::synthetic::SyntheticDomain;
use probdag::domains::tictactoe::{MinimaxOracle, TttState};
use probdag::harness::validate::{closed_form_pair, duality_and_dominance, extremal_fidelity, random_pair_cases};
use probdag::harness::{
    execute_experiment, load_manifest, pooled_se, replay_run, run_experiment, AggregateRecord, Experiment,
    ExperimentConfig, ExperimentResult, Method,
};
use probdag::oracles::{batch_posterior, negamax};
use probdag::{Domain, GpConfig, NodeStatus, PosteriorState, Representation, SearchDag};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Option<Outcome> {
    Some(Outcome { passed, detail: detail.into() })
}

fn within(elapsed: Duration, minutes: u64) -> (bool, String) {
    (elapsed <= Duration::from_secs(60 * minutes), format!("{:.1}s (limit {minutes} min)", elapsed.as_secs_f64()))
}

fn criterion_1() -> Option<Outcome> {
    let start = Instant::now();
    let cases = random_pair_cases(200, 11);
    let check = extremal_fidelity(&cases, 200_000, 12);
    let (fast, time) = within(start.elapsed(), 5);
    outcome(check.passed && fast, format!("{}; {time}", check.detail))
}

fn criterion_2() -> Option<Outcome> {
    let mut checks = closed_form_pair(10_000_000, 21);
    checks.push(duality_and_dominance(&random_pair_cases(200, 11)));
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| format!("{}: {}", c.name, c.detail)).collect();
    let summary = checks.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(", ");
    if failed.is_empty() {
        outcome(true, summary)
    } else {
        outcome(false, failed.join("; "))
    }
}

fn random_bag(domain: &SyntheticDomain, size: usize, rng: &mut ChaCha8Rng) -> probdag::FeatureBag {
    let mut bag = domain.root();
    for _ in 0..size {
        bag = bag.random_extension(15, rng).expect("room for another feature");
    }
    bag
}

/// Time to append 40 observations to a posterior already holding `n`
/// (best of three trials).
fn update_time(domain: &SyntheticDomain, n: usize) -> Duration {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let leaves: Vec<_> = (0..n + 40).map(|_| random_bag(domain, 5, &mut rng)).collect();
    let mut post = PosteriorState::new(GpConfig { scale: 1.0, noise: 1e-4, jitter: 1e-6 }).unwrap();
    for leaf in &leaves[..n] {
        post.add_observation(domain.kernel(), domain.key(leaf), leaf.clone(), domain.reward(leaf).unwrap()).unwrap();
    }
    (0..3)
        .map(|_| {
            let mut p = post.clone();
            let start = Instant::now();
            for leaf in &leaves[n..] {
                p.add_observation(domain.kernel(), domain.key(leaf), leaf.clone(), domain.reward(leaf).unwrap()).unwrap();
            }
            start.elapsed()
        })
        .min()
        .unwrap()
}

fn criterion_3() -> Option<Outcome> {
    let domain = SyntheticDomain::new(15, 5, 0).unwrap();
    let kernel = domain.kernel();
    let config = GpConfig { scale: 1.0, noise: 1e-4, jitter: 1e-6 };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let queries: Vec<_> = (0..100).map(|_| {
        let size = rng.random_range(0..=5);
        random_bag(&domain, size, &mut rng)
    }).collect();
    let mut post = PosteriorState::new(config).unwrap();
    let mut obs = Vec::new();
    let mut worst = 0.0f64;
    for i in 0..200 {
        let leaf = random_bag(&domain, 5, &mut rng);
        let r = domain.reward(&leaf).unwrap();
        post.add_observation(kernel, domain.key(&leaf), leaf.clone(), r).unwrap();
        obs.push((leaf, r));
        // interleave queries with the updates
        if i % 40 == 39 || i == 199 {
            let batch = batch_posterior(kernel, config, &obs, &queries).unwrap();
            for (q, b) in queries.iter().zip(&batch) {
                let inc = post.marginal(kernel, q);
                worst = worst.max((inc.mean - b.mean).abs()).max((inc.variance - b.variance).abs());
            }
        }
    }
    let t1 = update_time(&domain, 500);
    let t2 = update_time(&domain, 1000);
    let ratio = t2.as_secs_f64() / t1.as_secs_f64().max(1e-9);
    outcome(
        worst <= 1e-8 && ratio < 5.0,
        format!("max |incremental - batch| = {worst:.2e}; update time at 1000 / at 500 observations = {ratio:.2}"),
    )
}

fn full_runs() -> bool {
    std::env::var("ACCEPTANCE_FULL").is_ok_and(|v| v != "0" && !v.is_empty())
}

fn run(config: &ExperimentConfig) -> ExperimentResult {
    let result = execute_experiment(config, None).expect("experiment runs");
    assert_eq!(result.failures(), 0, "failed runs in {}", config.experiment.as_str());
    result
}

fn fmt(a: &AggregateRecord) -> String {
    format!("{} {:.4}±{:.4} (β={})", a.method.as_str(), a.mean, a.stderr, a.beta)
}

/// `a` above `b` by at least one pooled standard error (and strictly above).
fn separated(a: &AggregateRecord, b: &AggregateRecord) -> bool {
    a.mean > b.mean && a.mean - b.mean >= pooled_se(a, b)
}

fn criterion_4() -> Option<Outcome> {
    if !full_runs() {
        return None;
    }
    let start = Instant::now();
    let config = ExperimentConfig::defaults(Experiment::Synthetic);
    let result = run(&config);
    let last = config.budget;
    let best = |m| result.best_beta(m, last).cloned().expect("method present");
    let (dag, tree, simple, uct, ucd) =
        (best(Method::ProbDag), best(Method::ProbTree), best(Method::ProbDagSimplified), best(Method::Uct), best(Method::Ucd));
    let mut ok = [&dag, &tree].iter().all(|p| separated(p, &uct) && separated(p, &ucd));
    ok &= (dag.mean - simple.mean).abs() <= pooled_se(&dag, &simple);
    ok &= (dag.mean - tree.mean).abs() <= pooled_se(&dag, &tree);
    let (fast, time) = within(start.elapsed(), 20);
    let list = [&dag, &tree, &simple, &uct, &ucd].map(fmt).join(", ");
    outcome(ok && fast, format!("at {last}: {list}; {time}"))
}

fn criterion_5() -> Option<Outcome> {
    if !full_runs() {
        return None;
    }
    let mut config = ExperimentConfig::defaults(Experiment::Synthetic);
    config.methods = vec![Method::ProbDag, Method::ProbTree, Method::ProbDagSimplified];
    config.betas = vec![1.0];
    config.overrides.values_mut().for_each(|o| o.betas = None);
    config.repetitions = 5;
    config.budget = 3003;
    config.checkpoint_every = 3003;
    let result = run(&config);
    let optimum = result.manifest.optimum.as_ref().expect("synthetic optimum").reward;
    let misses: Vec<String> = result
        .manifest
        .runs
        .iter()
        .filter(|r| r.best.as_ref().is_none_or(|b| (b.reward - optimum).abs() > 1e-12))
        .map(|r| format!("{} rep {}", r.method.as_str(), r.repetition))
        .collect();
    outcome(
        misses.is_empty(),
        format!("{} runs at budget 3003, optimum {optimum:.6}; misses: {:?}", result.manifest.runs.len(), misses),
    )
}

fn criterion_6() -> Option<Outcome> {
    if !full_runs() {
        return None;
    }
    let start = Instant::now();
    let config = ExperimentConfig::defaults(Experiment::Tictactoe);
    let result = run(&config);
    let last = config.budget;
    let at = |m| result.best_beta(m, last).cloned().expect("method present");
    let (dag, uct, ucd) = (at(Method::ProbDag), at(Method::Uct), at(Method::Ucd));
    let mut ok = dag.mean >= -0.05 && dag.mean >= uct.mean && dag.mean >= ucd.mean;
    let positive: Vec<String> = config
        .methods
        .iter()
        .map(|&m| at(m))
        .filter(|a| a.mean > 2.0 * a.stderr)
        .map(|a| fmt(&a))
        .collect();
    ok &= positive.is_empty();
    let (fast, time) = within(start.elapsed(), 30);
    let list = config.methods.iter().map(|&m| fmt(&at(m))).collect::<Vec<_>>().join(", ");
    outcome(ok && fast, format!("at {last}: {list}; positive beyond noise: {positive:?}; {time}"))
}

fn criterion_7() -> Option<Outcome> {
    if !full_runs() {
        return None;
    }
    let start = Instant::now();
    let config = ExperimentConfig::defaults(Experiment::Featsel);
    let result = run(&config);
    let (last, half) = (config.budget, config.budget / 2);
    let at = |m, ck| result.best_beta(m, ck).cloned().expect("method present");
    let winners = [Method::ProbDag, Method::ProbDagSimplified, Method::UctRave].map(|m| at(m, last));
    let losers = [Method::Uct, Method::Ucd].map(|m| at(m, last));
    let mut ok = winners.iter().all(|w| losers.iter().all(|l| separated(w, l)));
    ok &= at(Method::ProbDag, half).mean >= at(Method::UctRave, half).mean;
    let optimum = result.manifest.optimum.as_ref().expect("featsel optimum").reward;
    let dag_runs: Vec<_> = result.manifest.runs.iter().filter(|r| r.method == Method::ProbDag).collect();
    let hits = dag_runs.iter().filter(|r| r.selected.as_ref().is_some_and(|s| (s.reward - optimum).abs() < 1e-12)).count();
    let (fast, time) = within(start.elapsed(), 20);
    let list = winners.iter().chain(&losers).map(fmt).collect::<Vec<_>>().join(", ");
    outcome(
        ok && fast,
        format!(
            "at {last}: {list}; at {half}: prob-dag {:.4} vs uct-rave {:.4}; prob-dag optimum match {hits}/{}; {time}",
            at(Method::ProbDag, half).mean,
            at(Method::UctRave, half).mean,
            dag_runs.len()
        ),
    )
}

fn criterion_8() -> Option<Outcome> {
    let dir = tempfile::tempdir().unwrap();
    let mut details = Vec::new();
    let mut ok = true;
    for experiment in [Experiment::Synthetic, Experiment::Tictactoe, Experiment::Featsel] {
        let mut config = ExperimentConfig::defaults(experiment);
        config.output = dir.path().join(experiment.as_str());
        config.repetitions = 2;
        config.budget = 60;
        config.checkpoint_every = 20;
        config.eval_games = 4;
        config.betas = vec![config.betas[0]];
        config.overrides.values_mut().for_each(|o| o.betas = None);
        config.write_traces = true;
        let result = run_experiment(&config).unwrap();
        let manifest = load_manifest(&config.output.join("manifest.json")).unwrap();
        for record in &result.manifest.runs {
            let original = std::fs::read(config.output.join(record.trace_file.as_ref().unwrap())).unwrap();
            let replay = replay_run(&manifest, record.index, &dir.path().join("replay")).unwrap();
            let fresh = std::fs::read(&replay.trace_path).unwrap();
            ok &= !original.is_empty() && original == fresh;
        }
        details.push(format!("{} {} runs", experiment.as_str(), result.manifest.runs.len()));
    }
    outcome(ok, format!("byte-identical replays: {}", details.join(", ")))
}

fn criterion_9() -> Option<Outcome> {
    let domain = SyntheticDomain::new(15, 5, 0).unwrap();
    let mut dag = SearchDag::from_domain(&domain, Representation::Dag);
    let mut queue = VecDeque::from([dag.root()]);
    let mut seen = BTreeSet::new();
    while let Some(id) = queue.pop_front() {
        if dag.node(id).status == NodeStatus::Boundary && seen.insert(id) {
            queue.extend(dag.expand(id, &domain).unwrap());
        }
    }
    let nodes = dag.len();
    let leaves = dag.nodes().iter().filter(|n| n.status == NodeStatus::Terminal).count();

    let oracle = MinimaxOracle::new();
    let empty = oracle.value_for_x(&TttState::empty()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut disagreements = 0;
    let mut positions = 0;
    while positions < 500 {
        let mut state = TttState::empty();
        let depth = rng.random_range(0..9);
        for _ in 0..depth {
            if state.is_over() {
                break;
            }
            let moves = state.legal_moves();
            state = state.play(moves[rng.random_range(0..moves.len())]);
        }
        let sign = if state.to_move() == probdag::domains::tictactoe::X { 1 } else { -1 };
        if oracle.value_for_x(&state).unwrap() != sign * negamax(&state) {
            disagreements += 1;
        }
        positions += 1;
    }
    outcome(
        nodes == 4944 && leaves == 3003 && empty == 0 && disagreements == 0,
        format!("{nodes} nodes / {leaves} leaves; minimax(empty) = {empty}; {disagreements}/{positions} negamax disagreements"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Option<Outcome>); 9] = [
        ("1 extremal-moment fidelity", criterion_1),
        ("2 closed-form and invariants", criterion_2),
        ("3 posterior equivalence and cost", criterion_3),
        ("4 synthetic search ordering", criterion_4),
        ("5 exhaustive convergence", criterion_5),
        ("6 tic-tac-toe vs minimax", criterion_6),
        ("7 feature selection", criterion_7),
        ("8 determinism of replays", criterion_8),
        ("9 structural counts", criterion_9),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Some(o) => {
                println!("{} criterion {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
                failed += usize::from(!o.passed);
            }
            None => println!("SKIP criterion {name}: set ACCEPTANCE_FULL=1"),
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
