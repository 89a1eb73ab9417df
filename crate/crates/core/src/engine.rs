//! The probabilistic search loop: descend by UCB over value beliefs, expand
//! the boundary node reached, roll out uniformly at random, condition the
//! generative-score posterior on the reward and refresh all beliefs.
//!
//! Random streams: every run seeds one ChaCha8 generator and uses stream
//! [`STREAM_PILOT`] for pilot rollouts, [`STREAM_SEARCH`] for search
//! rollouts and [`STREAM_EVAL`] for evaluation games.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dag::{NodeId, NodeKind, NodeStatus, Representation, SearchDag, StateKey};
use crate::delta::{build_delta_table, DeltaConfig, DeltaTable};
use crate::domains::Domain;
use crate::error::{PosteriorError, Result, SearchError};
use crate::extremal::ExtremalPrior;
use crate::gaussian::GaussianBelief;
use crate::posterior::{standardize_from_pilot, GpConfig, PosteriorState, Standardizer};
use crate::value::{boundary_value, refresh_values, summary_child, BackupConfig, BackupRule};

pub const STREAM_PILOT: u64 = 1;
pub const STREAM_SEARCH: u64 = 2;
pub const STREAM_EVAL: u64 = 3;

/// Generator for one phase of run `seed`.
pub fn phase_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Jitter is escalated tenfold on factorization breakdown up to this value.
pub const MAX_JITTER: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub beta: f64,
    pub lambda: f64,
    pub c: f64,
    pub rule: BackupRule,
    pub representation: Representation,
    pub budget: usize,
    pub seed: u64,
    /// Uniform rollouts used to standardize rewards; 0 disables
    /// standardization.
    pub pilot_rollouts: usize,
    /// Prior on the extremum in interior backups.
    pub regularizer: ExtremalPrior,
    /// Prior on the extremum while building the `Δ` table.
    pub delta_prior: ExtremalPrior,
    pub jitter: f64,
    pub summary: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            beta: 1.0,
            lambda: 1e-4,
            c: 1.0,
            rule: BackupRule::Ep,
            representation: Representation::Dag,
            budget: 100,
            seed: 0,
            pilot_rollouts: 0,
            regularizer: ExtremalPrior::standard_normal(),
            delta_prior: ExtremalPrior::standard_normal(),
            jitter: 1e-6,
            summary: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutResult<S> {
    pub terminal: S,
    pub key: StateKey,
    pub reward: f64,
    pub steps: usize,
}

/// Uniform random descent to a terminal state.
pub fn rollout<D: Domain>(domain: &D, from: &D::State, rng: &mut dyn rand::RngCore) -> Result<RolloutResult<D::State>, crate::error::DomainError> {
    let mut state = from.clone();
    let mut steps = 0;
    while !domain.is_terminal(&state) {
        match domain.random_successor(&state, rng) {
            Some(next) => state = next,
            None => break,
        }
        steps += 1;
    }
    let reward = domain.reward(&state)?;
    Ok(RolloutResult { key: domain.key(&state), terminal: state, reward, steps })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Key (hex) of the node the rollout started from.
    pub boundary: String,
    pub terminal: String,
    pub path_len: usize,
    pub raw_reward: f64,
    pub standardized_reward: f64,
    pub best_so_far: f64,
}

#[derive(Debug, Clone)]
pub struct BestLeaf<S> {
    pub state: S,
    pub key: StateKey,
    pub reward: f64,
}

/// Anything that can be stepped iteration by iteration and queried for a
/// move recommendation; shared by the probabilistic engine and baselines.
pub trait Searcher<S> {
    fn step(&mut self) -> Result<IterationRecord>;
    fn dag(&self) -> &SearchDag<S>;
    /// Recommended child of an explored node, `None` if it has none.
    fn recommend(&self, node: NodeId) -> Option<NodeId>;
    fn best(&self) -> Option<&BestLeaf<S>>;
    fn iterations(&self) -> usize;
    fn standardizer(&self) -> Standardizer;
    fn pilot_rewards(&self) -> &[f64];
}

/// Runs pilot rollouts from the root and returns the rewards.
pub fn pilot_rewards<D: Domain>(domain: &D, count: usize, seed: u64) -> Result<(Vec<f64>, Option<BestLeaf<D::State>>)> {
    let mut rng = phase_rng(seed, STREAM_PILOT);
    let mut out = Vec::with_capacity(count);
    let mut best: Option<BestLeaf<D::State>> = None;
    for i in 0..count {
        let r = rollout(domain, &domain.root(), &mut rng).map_err(|source| SearchError::Domain { iteration: i, source })?;
        out.push(r.reward);
        if best.as_ref().is_none_or(|b| r.reward > b.reward) {
            best = Some(BestLeaf { state: r.terminal, key: r.key, reward: r.reward });
        }
    }
    Ok((out, best))
}

pub fn standardizer_for(pilot: &[f64]) -> Result<Standardizer> {
    if pilot.is_empty() {
        return Ok(Standardizer::IDENTITY);
    }
    Ok(standardize_from_pilot(pilot)?)
}

/// The `Δ` table configuration a search on `domain` uses: step variance
/// `c` times the kernel's per-level increment.
pub fn delta_config<D: Domain>(domain: &D, config: &SearchConfig) -> DeltaConfig {
    DeltaConfig::for_domain(domain, config.c * domain.kernel().level_increment(), config.delta_prior)
}

pub struct ProbSearch<'d, D: Domain> {
    domain: &'d D,
    config: SearchConfig,
    backup: BackupConfig,
    dag: SearchDag<D::State>,
    posterior: PosteriorState<D::State>,
    delta: DeltaTable,
    values: Vec<GaussianBelief>,
    frontier: Vec<NodeId>,
    standardizer: Standardizer,
    pilot: Vec<f64>,
    rng: ChaCha8Rng,
    best: Option<BestLeaf<D::State>>,
    iteration: usize,
}

impl<'d, D: Domain> ProbSearch<'d, D> {
    pub fn new(domain: &'d D, config: SearchConfig) -> Result<Self> {
        if !(config.beta >= 0.0) || !(config.c > 0.0) || !(config.lambda > 0.0) {
            return Err(SearchError::Config(format!(
                "need beta >= 0, c > 0, lambda > 0; got beta {}, c {}, lambda {}",
                config.beta, config.c, config.lambda
            )));
        }
        let (pilot, best) = pilot_rewards(domain, config.pilot_rollouts, config.seed)?;
        let standardizer = standardizer_for(&pilot)?;
        let delta = build_delta_table(delta_config(domain, &config))?;
        let posterior = PosteriorState::new(GpConfig { scale: config.c, noise: config.lambda, jitter: config.jitter })?;
        let dag = SearchDag::from_domain(domain, config.representation);
        let mut search = Self {
            domain,
            config,
            backup: BackupConfig { rule: config.rule, regularizer: config.regularizer, summary_enabled: config.summary },
            dag,
            posterior,
            delta,
            values: Vec::new(),
            frontier: Vec::new(),
            standardizer,
            pilot,
            rng: phase_rng(config.seed, STREAM_SEARCH),
            best,
            iteration: 0,
        };
        let root = search.dag.root();
        search.add_to_frontier(root);
        search.values.push(GaussianBelief::point(0.0));
        search.refresh()?;
        Ok(search)
    }

    pub fn config(&self) -> &SearchConfig {
        &self.config
    }

    pub fn delta_table(&self) -> &DeltaTable {
        &self.delta
    }

    pub fn posterior(&self) -> &PosteriorState<D::State> {
        &self.posterior
    }

    pub fn value(&self, id: NodeId) -> GaussianBelief {
        self.values[id]
    }

    pub fn values(&self) -> &[GaussianBelief] {
        &self.values
    }

    pub fn frontier(&self) -> &[NodeId] {
        &self.frontier
    }

    fn add_to_frontier(&mut self, id: NodeId) {
        let node = self.dag.node(id);
        self.posterior.track(self.domain.kernel(), &node.key, &node.state);
        self.frontier.push(id);
    }

    fn remaining_depth(&self, id: NodeId) -> usize {
        self.domain.max_depth().saturating_sub(self.dag.node(id).level)
    }

    /// Generative-score belief of any explored node.
    pub fn generative(&self, id: NodeId) -> GaussianBelief {
        let node = self.dag.node(id);
        self.posterior
            .tracked_marginal(&node.key)
            .unwrap_or_else(|| self.posterior.marginal(self.domain.kernel(), &node.state))
    }

    /// UCB child choice (Eq. 13 form): `mean ± beta * sqrt(log(n) * var)`
    /// with `n` the parent's visits; ties go to the lowest id.
    pub fn select_child(&self, id: NodeId) -> Option<NodeId> {
        let node = self.dag.node(id);
        select_ucb(node.kind, node.visits, &node.children, &self.values, self.config.beta)
    }

    fn refresh(&mut self) -> Result<usize> {
        let kernel = self.domain.kernel();
        for &id in &self.frontier {
            let node = self.dag.node(id);
            let g = self
                .posterior
                .tracked_marginal(&node.key)
                .unwrap_or_else(|| self.posterior.marginal(kernel, &node.state));
            let delta = match node.status {
                NodeStatus::Terminal => GaussianBelief::point(0.0),
                _ => self.delta.delta_for_boundary_node(self.remaining_depth(id)),
            };
            self.values[id] = boundary_value(g, delta);
        }
        let (domain, dag, posterior, delta) = (self.domain, &self.dag, &self.posterior, &self.delta);
        let summary = |id: NodeId| {
            let node = dag.node(id);
            let unexplored = domain.branching(node.level).saturating_sub(node.children.len());
            if unexplored == 0 {
                return Ok(None);
            }
            let g = posterior
                .tracked_marginal(&node.key)
                .unwrap_or_else(|| posterior.marginal(kernel, &node.state));
            let remaining = domain.max_depth().saturating_sub(node.level);
            summary_child(g, delta, remaining, unexplored)
        };
        Ok(refresh_values(dag, &mut self.values, &self.frontier, &self.backup, &summary)?)
    }

    fn observe(&mut self, key: StateKey, state: D::State, reward: f64) -> Result<()> {
        let kernel = self.domain.kernel();
        loop {
            match self.posterior.add_observation(kernel, key.clone(), state.clone(), reward) {
                Ok(()) => return Ok(()),
                Err(PosteriorError::Breakdown { .. }) if self.posterior.config().jitter * 10.0 <= MAX_JITTER => {
                    let mut cfg = self.posterior.config();
                    cfg.jitter = if cfg.jitter > 0.0 { cfg.jitter * 10.0 } else { 1e-6 };
                    log::warn!("factorization breakdown; rebuilding with jitter {:e}", cfg.jitter);
                    self.posterior = self.posterior.rebuilt(kernel, cfg)?;
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
}

/// UCB over value beliefs; `None` without children.
pub fn select_ucb(kind: NodeKind, parent_visits: u64, children: &[NodeId], values: &[GaussianBelief], beta: f64) -> Option<NodeId> {
    let log_n = if parent_visits > 1 { (parent_visits as f64).ln() } else { 0.0 };
    let sign = match kind {
        NodeKind::Max => 1.0,
        NodeKind::Min => -1.0,
    };
    let mut best: Option<(f64, NodeId)> = None;
    for &c in children {
        let v = values[c];
        let score = sign * v.mean + beta * (log_n * v.variance).sqrt();
        if best.is_none_or(|(s, id)| score > s || (score == s && c < id)) {
            best = Some((score, c));
        }
    }
    best.map(|(_, id)| id)
}

/// MAP choice among children: best mean for the node's player, ties to the
/// lowest id.
pub fn recommend_map(kind: NodeKind, children: &[NodeId], values: &[GaussianBelief]) -> Option<NodeId> {
    select_ucb(kind, 0, children, values, 0.0)
}

impl<D: Domain> Searcher<D::State> for ProbSearch<'_, D> {
    fn step(&mut self) -> Result<IterationRecord> {
        let iteration = self.iteration;
        let root = self.dag.root();
        let mut node = root;
        self.dag.increment_visits(node);
        let mut path_len = 1;
        while self.dag.node(node).status == NodeStatus::Interior {
            node = self.select_child(node).ok_or(crate::error::DagError::NoChildren(node))?;
            self.dag.increment_visits(node);
            path_len += 1;
        }

        if self.dag.node(node).status == NodeStatus::Boundary {
            let before = self.dag.len();
            self.dag.expand(node, self.domain)?;
            if self.dag.node(node).status == NodeStatus::Interior {
                let key = self.dag.node(node).key.clone();
                self.posterior.untrack(&key);
                self.frontier.retain(|&id| id != node);
            }
            for id in before..self.dag.len() {
                self.add_to_frontier(id);
                self.values.push(GaussianBelief::point(0.0));
            }
        }

        let start = self.dag.node(node).state.clone();
        let r = rollout(self.domain, &start, &mut self.rng).map_err(|source| SearchError::Domain { iteration, source })?;
        let z = self.standardizer.apply(r.reward);
        if self.best.as_ref().is_none_or(|b| r.reward > b.reward) {
            self.best = Some(BestLeaf { state: r.terminal.clone(), key: r.key.clone(), reward: r.reward });
        }
        let terminal_hex = r.key.to_hex();
        self.observe(r.key, r.terminal, z)?;
        self.refresh()?;
        self.iteration += 1;
        Ok(IterationRecord {
            iteration,
            boundary: self.dag.node(node).key.to_hex(),
            terminal: terminal_hex,
            path_len,
            raw_reward: r.reward,
            standardized_reward: z,
            best_so_far: self.best.as_ref().map_or(f64::NEG_INFINITY, |b| b.reward),
        })
    }

    fn dag(&self) -> &SearchDag<D::State> {
        &self.dag
    }

    fn recommend(&self, node: NodeId) -> Option<NodeId> {
        let n = self.dag.node(node);
        recommend_map(n.kind, &n.children, &self.values)
    }

    fn best(&self) -> Option<&BestLeaf<D::State>> {
        self.best.as_ref()
    }

    fn iterations(&self) -> usize {
        self.iteration
    }

    fn standardizer(&self) -> Standardizer {
        self.standardizer
    }

    fn pilot_rewards(&self) -> &[f64] {
        &self.pilot
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunTrace {
    pub config: SearchConfig,
    pub standardizer: Standardizer,
    pub pilot_rewards: Vec<f64>,
    pub delta_table: Vec<GaussianBelief>,
    pub iterations: Vec<IterationRecord>,
    pub best_key: Option<String>,
    pub best_reward: Option<f64>,
    pub dag_nodes: usize,
}

/// Runs the full budget and collects the trace.
pub fn run<D: Domain>(domain: &D, config: SearchConfig) -> Result<RunTrace> {
    let mut search = ProbSearch::new(domain, config)?;
    let mut iterations = Vec::with_capacity(config.budget);
    for _ in 0..config.budget {
        iterations.push(search.step()?);
    }
    Ok(RunTrace {
        config,
        standardizer: search.standardizer,
        pilot_rewards: search.pilot.clone(),
        delta_table: search.delta.entries().to_vec(),
        iterations,
        best_key: search.best.as_ref().map(|b| b.key.to_hex()),
        best_reward: search.best.as_ref().map(|b| b.reward),
        dag_nodes: search.dag.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::synthetic::SyntheticDomain;
    use crate::domains::tictactoe::TicTacToe;

    fn values(list: &[(f64, f64)]) -> Vec<GaussianBelief> {
        list.iter().map(|&(m, v)| GaussianBelief { mean: m, variance: v }).collect()
    }

    #[test]
    fn ucb_selection_rules() {
        let v = values(&[(0.0, 1.0), (0.5, 0.1), (0.5, 3.0)]);
        assert_eq!(select_ucb(NodeKind::Max, 10, &[0, 1, 2], &v, 0.0), Some(1));
        assert_eq!(select_ucb(NodeKind::Max, 10, &[0, 1, 2], &v, 1.0), Some(2));
        // log floored: no exploration bonus at n <= 1
        assert_eq!(select_ucb(NodeKind::Max, 1, &[0, 1, 2], &v, 5.0), Some(1));
        let w = values(&[(-1.0, 1.0), (1.0, 1.0)]);
        assert_eq!(select_ucb(NodeKind::Min, 5, &[0, 1], &w, 0.0), Some(0));
        assert_eq!(select_ucb(NodeKind::Max, 5, &[], &w, 0.0), None);
    }

    #[test]
    fn rollout_reaches_terminals() {
        let d = SyntheticDomain::new(15, 5, 0).unwrap();
        let mut rng = phase_rng(0, STREAM_SEARCH);
        let start = crate::FeatureBag::from_unsorted(vec![0, 1, 2, 3]);
        let r = rollout(&d, &start, &mut rng).unwrap();
        assert_eq!(r.terminal.len(), 5);
        assert_eq!(r.terminal.intersection_count(&start), 4);
        assert_eq!(r.steps, 1);
        let again = rollout(&d, &r.terminal, &mut rng).unwrap();
        assert_eq!(again.steps, 0);
        assert_eq!(again.reward, r.reward);

        let t = TicTacToe::new();
        for _ in 0..20 {
            let r = rollout(&t, &t.root(), &mut rng).unwrap();
            assert!([-1.0, 0.0, 1.0].contains(&r.reward));
        }
    }

    #[test]
    fn first_iteration_expands_the_root() {
        let d = SyntheticDomain::new(15, 5, 0).unwrap();
        let mut s = ProbSearch::new(&d, SearchConfig { budget: 1, ..Default::default() }).unwrap();
        assert_eq!(s.dag().len(), 1);
        s.step().unwrap();
        assert_eq!(s.dag().len(), 16);
        assert_eq!(s.dag().node(0).visits, 1);
        assert_eq!(s.posterior().len(), 1);
    }

    #[test]
    fn empty_budget() {
        let d = SyntheticDomain::new(15, 5, 0).unwrap();
        let t = run(&d, SearchConfig { budget: 0, ..Default::default() }).unwrap();
        assert!(t.iterations.is_empty());
        assert_eq!(t.dag_nodes, 1);
    }

    #[test]
    fn runs_are_reproducible() {
        let d = SyntheticDomain::new(8, 3, 4).unwrap();
        let cfg = SearchConfig { budget: 40, seed: 9, ..Default::default() };
        let a = run(&d, cfg).unwrap();
        let b = run(&d, cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
