//! Per-level beliefs over the optimal increment `Δ = v - g` of a boundary
//! node.
//!
//! Below a boundary node the search space is abstracted as a tree in which
//! each child's generative score is its parent's plus an independent step
//! `ξ ~ N(0, c)`. The increment then satisfies `Δ_leaf = 0` and
//! `Δ_parent = ext_j (ξ_j + Δ_j)` over the children, which depends only on
//! the distance to the leaves. The table is built once, bottom-up.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Mutex;

use crate::dag::NodeKind;
use crate::domains::Domain;
use crate::error::MathError;
use crate::extremal::{extremum_of_set, ExtremalPrior, Extremum};
use crate::gaussian::GaussianBelief;

impl From<NodeKind> for Extremum {
    fn from(kind: NodeKind) -> Self {
        match kind {
            NodeKind::Max => Extremum::Max,
            NodeKind::Min => Extremum::Min,
        }
    }
}

/// Index `L` describes the nodes at distance `L + 1` from the leaves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaConfig {
    pub depth: usize,
    pub branching: Vec<usize>,
    pub step_variance: f64,
    pub kinds: Vec<NodeKind>,
    pub prior: ExtremalPrior,
}

impl DeltaConfig {
    /// All-MAX configuration with constant branching.
    pub fn uniform(depth: usize, branching: usize, step_variance: f64, prior: ExtremalPrior) -> Self {
        Self {
            depth,
            branching: vec![branching; depth],
            step_variance,
            kinds: vec![NodeKind::Max; depth],
            prior,
        }
    }

    /// Reads the branching and kind profile off a domain. A node at level
    /// `l` has remaining depth `max_depth - l`, so entry `L` comes from level
    /// `max_depth - L - 1`.
    pub fn for_domain<D: Domain>(domain: &D, step_variance: f64, prior: ExtremalPrior) -> Self {
        let depth = domain.max_depth();
        let levels = (0..depth).map(|l| depth - l - 1);
        Self {
            depth,
            branching: levels.clone().map(|lvl| domain.branching(lvl)).collect(),
            step_variance,
            kinds: levels.map(|lvl| domain.node_kind(lvl)).collect(),
            prior,
        }
    }

    fn validate(&self) -> Result<(), MathError> {
        if self.branching.len() != self.depth || self.kinds.len() != self.depth {
            return Err(MathError::InvalidConfig(format!(
                "depth {} with {} branching entries and {} kinds",
                self.depth,
                self.branching.len(),
                self.kinds.len()
            )));
        }
        if !(self.step_variance > 0.0 && self.step_variance.is_finite()) {
            return Err(MathError::InvalidConfig(format!("step variance {}", self.step_variance)));
        }
        if self.branching.contains(&0) {
            return Err(MathError::InvalidConfig("zero branching factor".into()));
        }
        Ok(())
    }
}

/// One extremal step: `ext` over `b` independent copies of `below ⊕ N(0, c)`.
fn level_step(
    below: GaussianBelief,
    b: usize,
    c: f64,
    kind: NodeKind,
    prior: ExtremalPrior,
) -> Result<GaussianBelief, MathError> {
    let option = below + GaussianBelief { mean: 0.0, variance: c };
    extremum_of_set(&vec![option; b], None, prior, kind.into())
}

#[derive(Debug, Serialize)]
pub struct DeltaTable {
    config: DeltaConfig,
    entries: Vec<GaussianBelief>,
    #[serde(skip)]
    summaries: Mutex<HashMap<(usize, usize), GaussianBelief>>,
}

impl Clone for DeltaTable {
    fn clone(&self) -> Self {
        Self {
            config: self.config.clone(),
            entries: self.entries.clone(),
            summaries: Mutex::new(HashMap::new()),
        }
    }
}

pub fn build_delta_table(config: DeltaConfig) -> Result<DeltaTable, MathError> {
    config.validate()?;
    let mut entries = Vec::with_capacity(config.depth + 1);
    entries.push(GaussianBelief::point(0.0));
    for l in 0..config.depth {
        let next = level_step(entries[l], config.branching[l], config.step_variance, config.kinds[l], config.prior)?;
        entries.push(next);
    }
    Ok(DeltaTable { config, entries, summaries: Mutex::new(HashMap::new()) })
}

impl DeltaTable {
    pub fn config(&self) -> &DeltaConfig {
        &self.config
    }

    pub fn entries(&self) -> &[GaussianBelief] {
        &self.entries
    }

    pub fn depth(&self) -> usize {
        self.config.depth
    }

    /// `Δ` of a boundary node with the given distance to the leaves.
    ///
    /// # Panics
    /// If `remaining_depth` exceeds the table depth.
    pub fn delta_for_boundary_node(&self, remaining_depth: usize) -> GaussianBelief {
        assert!(
            remaining_depth <= self.config.depth,
            "remaining depth {remaining_depth} beyond table depth {}",
            self.config.depth
        );
        self.entries[remaining_depth]
    }

    /// `Δ` recomputed for a node at `remaining_depth` whose top-level
    /// branching is replaced by `options`. Cached per `(depth, options)`.
    pub fn summary_delta(&self, remaining_depth: usize, options: usize) -> Result<GaussianBelief, MathError> {
        assert!(remaining_depth >= 1 && remaining_depth <= self.config.depth);
        assert!(options >= 1);
        let key = (remaining_depth, options);
        let mut cache = self.summaries.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(b) = cache.get(&key) {
            return Ok(*b);
        }
        let l = remaining_depth - 1;
        let b = level_step(self.entries[l], options, self.config.step_variance, self.config.kinds[l], self.config.prior)?;
        cache.insert(key, b);
        Ok(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const INV_SQRT_PI: f64 = 0.564_189_583_547_756_3;

    #[test]
    fn leaf_entry_is_a_point_mass() {
        let t = build_delta_table(DeltaConfig::uniform(3, 4, 0.5, ExtremalPrior::None)).unwrap();
        assert_eq!(t.delta_for_boundary_node(0), GaussianBelief::point(0.0));
        assert_eq!(t.entries().len(), 4);
        assert_eq!(t.delta_for_boundary_node(3), t.entries()[3]);
    }

    #[test]
    fn single_option_is_one_step() {
        let t = build_delta_table(DeltaConfig::uniform(1, 1, 0.25, ExtremalPrior::None)).unwrap();
        assert_eq!(t.delta_for_boundary_node(1), GaussianBelief { mean: 0.0, variance: 0.25 });
    }

    #[test]
    fn two_options_match_closed_form() {
        let t = build_delta_table(DeltaConfig::uniform(1, 2, 1.0, ExtremalPrior::None)).unwrap();
        let d = t.delta_for_boundary_node(1);
        assert_abs_diff_eq!(d.mean, INV_SQRT_PI, epsilon = 1e-12);
        assert_abs_diff_eq!(d.variance, 1.0 - 1.0 / std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn pure_brownian_accumulation() {
        let t = build_delta_table(DeltaConfig::uniform(6, 1, 0.3, ExtremalPrior::None)).unwrap();
        for (l, e) in t.entries().iter().enumerate() {
            assert_abs_diff_eq!(e.mean, 0.0);
            assert_abs_diff_eq!(e.variance, 0.3 * l as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn monotone_in_level_branching_and_step() {
        let base = build_delta_table(DeltaConfig::uniform(4, 3, 1.0, ExtremalPrior::None)).unwrap();
        let wider = build_delta_table(DeltaConfig::uniform(4, 4, 1.0, ExtremalPrior::None)).unwrap();
        let steeper = build_delta_table(DeltaConfig::uniform(4, 3, 1.5, ExtremalPrior::None)).unwrap();
        for l in 1..=4 {
            assert!(base.entries()[l].mean >= base.entries()[l - 1].mean);
            assert!(wider.entries()[l].mean > base.entries()[l].mean);
            assert!(steeper.entries()[l].mean > base.entries()[l].mean);
        }
    }

    #[test]
    fn flipping_kinds_negates_means() {
        let mut cfg = DeltaConfig::uniform(3, 3, 1.0, ExtremalPrior::None);
        cfg.kinds = vec![NodeKind::Max, NodeKind::Min, NodeKind::Max];
        let a = build_delta_table(cfg.clone()).unwrap();
        cfg.kinds = vec![NodeKind::Min, NodeKind::Max, NodeKind::Min];
        let b = build_delta_table(cfg).unwrap();
        for (x, y) in a.entries().iter().zip(b.entries()) {
            assert_eq!(x.mean, -y.mean);
            assert_eq!(x.variance, y.variance);
        }
    }

    #[test]
    fn summary_grows_with_option_count() {
        let t = build_delta_table(DeltaConfig::uniform(2, 5, 1.0, ExtremalPrior::None)).unwrap();
        let one = t.summary_delta(1, 1).unwrap();
        assert_eq!(one, GaussianBelief { mean: 0.0, variance: 1.0 });
        assert!(t.summary_delta(2, 2).unwrap().mean > t.summary_delta(2, 1).unwrap().mean);
        assert_eq!(t.summary_delta(2, 5).unwrap(), t.delta_for_boundary_node(2));
    }

    #[test]
    fn domain_profile_is_read_from_the_leaves_up() {
        use crate::domains::tictactoe::TicTacToe;
        let cfg = DeltaConfig::for_domain(&TicTacToe::new(), 0.05, ExtremalPrior::None);
        assert_eq!(cfg.branching, vec![1, 2, 3, 4, 5, 6, 7, 8, 9]);
        // the node one step above the leaves is at level 8 (X to move)
        assert_eq!(cfg.kinds[0], NodeKind::Max);
        assert_eq!(cfg.kinds[1], NodeKind::Min);
        assert_eq!(cfg.kinds[8], NodeKind::Max);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(build_delta_table(DeltaConfig::uniform(2, 2, 0.0, ExtremalPrior::None)).is_err());
        assert!(build_delta_table(DeltaConfig::uniform(2, 0, 1.0, ExtremalPrior::None)).is_err());
        let mut cfg = DeltaConfig::uniform(2, 2, 1.0, ExtremalPrior::None);
        cfg.branching.pop();
        assert!(build_delta_table(cfg).is_err());
    }
}
