//! Count-based comparison methods on the same graph and domain interfaces:
//! UCT on the tree, UCD on the DAG (updating only the traversed path) and
//! UCT-RAVE for feature-bag domains.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::dag::{NodeId, NodeKind, NodeStatus, Representation, SearchDag};
use crate::domains::{Domain, FeatureBag};
use crate::engine::{
    phase_rng, pilot_rewards, rollout, standardizer_for, BestLeaf, IterationRecord, Searcher, STREAM_SEARCH,
};
use crate::error::{DagError, Result, SearchError};
use crate::posterior::Standardizer;

/// Running reward statistics of one node.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CountStats {
    pub visits: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl CountStats {
    pub fn update(&mut self, reward: f64) {
        self.visits += 1;
        self.sum += reward;
        self.sum_sq += reward * reward;
    }

    pub fn mean(&self) -> f64 {
        if self.visits == 0 {
            0.0
        } else {
            self.sum / self.visits as f64
        }
    }

    /// Population variance of the recorded rewards.
    pub fn variance(&self) -> f64 {
        if self.visits == 0 {
            return 0.0;
        }
        let m = self.mean();
        (self.sum_sq / self.visits as f64 - m * m).max(0.0)
    }
}

fn sign(kind: NodeKind) -> f64 {
    match kind {
        NodeKind::Max => 1.0,
        NodeKind::Min => -1.0,
    }
}

/// UCT child choice: unvisited children first (lowest id), then
/// `mean + beta * sqrt(ln(n_parent) / n_child)` with the mean taken from the
/// perspective of the player at the parent.
pub fn uct_select(kind: NodeKind, parent: &CountStats, children: &[(NodeId, CountStats)], beta: f64) -> Option<NodeId> {
    if let Some(&(id, _)) = children.iter().filter(|(_, s)| s.visits == 0).min_by_key(|(id, _)| *id) {
        return Some(id);
    }
    let ln_n = (parent.visits.max(1) as f64).ln();
    let mut best: Option<(f64, NodeId)> = None;
    for &(id, s) in children {
        let score = sign(kind) * s.mean() + beta * (ln_n / s.visits as f64).sqrt();
        if best.is_none_or(|(b, bid)| score > b || (score == b && id < bid)) {
            best = Some((score, id));
        }
    }
    best.map(|(_, id)| id)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackpropMode {
    Uct,
    Ucd,
}

/// Adds the reward to every node of the descent path. Under both modes only
/// the traversed nodes change; in a DAG other ancestors keep their counts.
pub fn backprop(stats: &mut [CountStats], path: &[NodeId], reward: f64) {
    for &id in path {
        stats[id].update(reward);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RaveConfig {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl Default for RaveConfig {
    fn default() -> Self {
        Self { c1: 1e-4, c2: 1e4, c3: 1e4 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MeanCount {
    pub sum: f64,
    pub count: u64,
}

impl MeanCount {
    fn add(&mut self, x: f64) {
        self.sum += x;
        self.count += 1;
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }
}

/// Global (per feature) and local (per node and feature) rollout averages.
#[derive(Debug, Clone, Default)]
pub struct RaveStats {
    global: HashMap<u16, MeanCount>,
    local: HashMap<(NodeId, u16), MeanCount>,
}

impl RaveStats {
    pub fn global(&self, feature: u16) -> MeanCount {
        self.global.get(&feature).copied().unwrap_or_default()
    }

    pub fn local(&self, node: NodeId, feature: u16) -> MeanCount {
        self.local.get(&(node, feature)).copied().unwrap_or_default()
    }
}

pub fn rave_update(stats: &mut RaveStats, path: &[NodeId], terminal: &FeatureBag, reward: f64) {
    for &p in terminal.features() {
        stats.global.entry(p).or_default().add(reward);
        for &i in path {
            stats.local.entry((i, p)).or_default().add(reward);
        }
    }
}

/// One child candidate for [`rave_select`]: id, the feature it adds and its
/// own statistics.
#[derive(Debug, Clone, Copy)]
pub struct RaveCandidate {
    pub id: NodeId,
    pub feature: u16,
    pub stats: CountStats,
}

/// Score of one child. Unvisited children use mean 0, variance 0 and count 1
/// inside the exploration term; a missing local average uses weight 1 on the
/// global one.
pub fn rave_score(parent: NodeId, parent_visits: u64, c: &RaveCandidate, stats: &RaveStats, cfg: &RaveConfig) -> f64 {
    let n_j = c.stats.visits as f64;
    let alpha = cfg.c2 / (cfg.c2 + n_j);
    let local = stats.local(parent, c.feature);
    let beta = cfg.c3 / (cfg.c3 + local.count as f64);
    let l = local.mean().unwrap_or(0.0);
    let g = stats.global(c.feature).mean().unwrap_or(0.0);
    let n_eff = n_j.max(1.0);
    let ln_i = (parent_visits.max(1) as f64).ln();
    let explore = (cfg.c1 * ln_i / n_eff * (c.stats.variance() + (2.0 * ln_i / n_eff).sqrt()).min(0.25)).sqrt();
    (1.0 - alpha) * c.stats.mean() + alpha * ((1.0 - beta) * l + beta * g) + explore
}

pub fn rave_select(parent: NodeId, parent_visits: u64, children: &[RaveCandidate], stats: &RaveStats, cfg: &RaveConfig) -> Option<NodeId> {
    let mut best: Option<(f64, NodeId)> = None;
    for c in children {
        let score = rave_score(parent, parent_visits, c, stats, cfg);
        if best.is_none_or(|(b, bid)| score > b || (score == b && c.id < bid)) {
            best = Some((score, c.id));
        }
    }
    best.map(|(_, id)| id)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMethod {
    Uct,
    Ucd,
    UctRave,
}

impl CountMethod {
    pub fn representation(self) -> Representation {
        match self {
            CountMethod::Ucd => Representation::Dag,
            CountMethod::Uct | CountMethod::UctRave => Representation::Tree,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountConfig {
    pub method: CountMethod,
    pub beta: f64,
    pub seed: u64,
    pub pilot_rollouts: usize,
    pub rave: RaveConfig,
}

/// UCT / UCD / UCT-RAVE search. Each iteration descends from the root,
/// expands a visited boundary node, steps into one child (a node never
/// visited before ends the descent), rolls out and backs up along the path.
pub struct CountSearch<'d, D: Domain> {
    domain: &'d D,
    config: CountConfig,
    dag: SearchDag<D::State>,
    stats: Vec<CountStats>,
    rave: RaveStats,
    standardizer: Standardizer,
    pilot: Vec<f64>,
    rng: ChaCha8Rng,
    best: Option<BestLeaf<D::State>>,
    iteration: usize,
}

impl<'d, D: Domain> CountSearch<'d, D> {
    pub fn new(domain: &'d D, config: CountConfig) -> Result<Self> {
        if !(config.beta >= 0.0) {
            return Err(SearchError::Config(format!("beta must be >= 0, got {}", config.beta)));
        }
        if config.method == CountMethod::UctRave && domain.feature_bag(&domain.root()).is_none() {
            return Err(SearchError::Config("UCT-RAVE needs a feature-bag domain".into()));
        }
        let (pilot, best) = pilot_rewards(domain, config.pilot_rollouts, config.seed)?;
        let standardizer = standardizer_for(&pilot)?;
        Ok(Self {
            domain,
            config,
            dag: SearchDag::from_domain(domain, config.method.representation()),
            stats: vec![CountStats::default()],
            rave: RaveStats::default(),
            standardizer,
            pilot,
            rng: phase_rng(config.seed, STREAM_SEARCH),
            best,
            iteration: 0,
        })
    }

    pub fn stats(&self, id: NodeId) -> CountStats {
        self.stats[id]
    }

    pub fn rave_stats(&self) -> &RaveStats {
        &self.rave
    }

    fn select(&self, id: NodeId) -> Option<NodeId> {
        let node = self.dag.node(id);
        match self.config.method {
            CountMethod::Uct | CountMethod::Ucd => {
                let children: Vec<(NodeId, CountStats)> = node.children.iter().map(|&c| (c, self.stats[c])).collect();
                uct_select(node.kind, &self.stats[id], &children, self.config.beta)
            }
            CountMethod::UctRave => {
                let parent_bag = self.domain.feature_bag(&node.state)?;
                let children: Vec<RaveCandidate> = node
                    .children
                    .iter()
                    .filter_map(|&c| {
                        let bag = self.domain.feature_bag(&self.dag.node(c).state)?;
                        Some(RaveCandidate { id: c, feature: bag.added_over(parent_bag)?, stats: self.stats[c] })
                    })
                    .collect();
                rave_select(id, self.stats[id].visits, &children, &self.rave, &self.config.rave)
            }
        }
    }
}

impl<D: Domain> Searcher<D::State> for CountSearch<'_, D> {
    fn step(&mut self) -> Result<IterationRecord> {
        let iteration = self.iteration;
        let root = self.dag.root();
        let mut path = vec![root];
        let mut node = root;
        loop {
            let status = self.dag.node(node).status;
            if status == NodeStatus::Terminal {
                break;
            }
            if status == NodeStatus::Boundary {
                if node != root && self.stats[node].visits == 0 {
                    break;
                }
                self.dag.expand(node, self.domain)?;
                self.stats.resize(self.dag.len(), CountStats::default());
                if self.dag.node(node).status != NodeStatus::Interior {
                    break;
                }
            }
            node = self.select(node).ok_or(DagError::NoChildren(node))?;
            path.push(node);
        }

        let start = self.dag.node(node).state.clone();
        let r = rollout(self.domain, &start, &mut self.rng).map_err(|source| SearchError::Domain { iteration, source })?;
        let z = self.standardizer.apply(r.reward);
        for &id in &path {
            self.dag.increment_visits(id);
        }
        backprop(&mut self.stats, &path, z);
        if self.config.method == CountMethod::UctRave {
            if let Some(bag) = self.domain.feature_bag(&r.terminal) {
                rave_update(&mut self.rave, &path, bag, z);
            }
        }
        if self.best.as_ref().is_none_or(|b| r.reward > b.reward) {
            self.best = Some(BestLeaf { state: r.terminal.clone(), key: r.key.clone(), reward: r.reward });
        }
        self.iteration += 1;
        Ok(IterationRecord {
            iteration,
            boundary: self.dag.node(node).key.to_hex(),
            terminal: r.key.to_hex(),
            path_len: path.len(),
            raw_reward: r.reward,
            standardized_reward: z,
            best_so_far: self.best.as_ref().map_or(f64::NEG_INFINITY, |b| b.reward),
        })
    }

    fn dag(&self) -> &SearchDag<D::State> {
        &self.dag
    }

    /// Most visited child; ties by better mean for the player to move, then
    /// lowest id. Unvisited children are never recommended.
    fn recommend(&self, node: NodeId) -> Option<NodeId> {
        let n = self.dag.node(node);
        let s = sign(n.kind);
        let mut best: Option<(u64, f64, NodeId)> = None;
        for &c in &n.children {
            let st = self.stats[c];
            if st.visits == 0 {
                continue;
            }
            let m = s * st.mean();
            let better = match best {
                None => true,
                Some((v, bm, _)) => st.visits > v || (st.visits == v && m > bm),
            };
            if better {
                best = Some((st.visits, m, c));
            }
        }
        best.map(|(_, _, id)| id)
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
