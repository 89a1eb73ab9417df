//! Beliefs over optimal values `v`: boundary nodes combine their generative
//! score with the level's `Δ`, interior nodes back up the extremum of their
//! children.

use serde::{Deserialize, Serialize};

use crate::dag::{NodeId, NodeKind, NodeStatus, SearchDag};
use crate::delta::DeltaTable;
use crate::error::MathError;
use crate::extremal::{extremum_of_set, ExtremalPrior};
use crate::gaussian::GaussianBelief;

/// Variance floor applied before dividing by a child's standard deviation.
pub const SOFTMAX_VARIANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BackupRule {
    #[default]
    Ep,
    Softmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackupConfig {
    pub rule: BackupRule,
    pub regularizer: ExtremalPrior,
    pub summary_enabled: bool,
}

impl Default for BackupConfig {
    fn default() -> Self {
        Self { rule: BackupRule::Ep, regularizer: ExtremalPrior::standard_normal(), summary_enabled: true }
    }
}

pub fn boundary_value(g: GaussianBelief, delta: GaussianBelief) -> GaussianBelief {
    g + delta
}

pub fn backup_ep(children: &[GaussianBelief], kind: NodeKind, regularizer: ExtremalPrior) -> Result<GaussianBelief, MathError> {
    extremum_of_set(children, None, regularizer, kind.into())
}

/// Belief standing in for all children of a node that are not in the
/// explored DAG: the parent's score plus `Δ` recomputed with
/// `unexplored` options at the top level.
pub fn summary_child(
    parent_g: GaussianBelief,
    table: &DeltaTable,
    parent_remaining_depth: usize,
    unexplored: usize,
) -> Result<Option<GaussianBelief>, MathError> {
    if unexplored == 0 {
        return Ok(None);
    }
    Ok(Some(parent_g + table.summary_delta(parent_remaining_depth, unexplored)?))
}

/// Normalized softmax weights of the children (for a MIN node the means are
/// negated first).
pub fn softmax_weights(children: &[GaussianBelief], kind: NodeKind) -> Vec<f64> {
    let sign = match kind {
        NodeKind::Max => 1.0,
        NodeKind::Min => -1.0,
    };
    let best = children.iter().map(|c| sign * c.mean).fold(f64::NEG_INFINITY, f64::max);
    let u: Vec<f64> = children
        .iter()
        .map(|c| (-(best - sign * c.mean) / c.variance.max(SOFTMAX_VARIANCE_FLOOR).sqrt()).exp())
        .collect();
    let total: f64 = u.iter().sum();
    u.into_iter().map(|x| x / total).collect()
}

/// Softmax-weighted average of the children.
///
/// # Panics
/// On an empty child list.
pub fn backup_softmax(children: &[GaussianBelief], kind: NodeKind) -> GaussianBelief {
    assert!(!children.is_empty(), "softmax backup of no children");
    let w = softmax_weights(children, kind);
    let mean = w.iter().zip(children).map(|(w, c)| w * c.mean).sum();
    let variance = w.iter().zip(children).map(|(w, c)| w * w * c.variance).sum();
    GaussianBelief { mean, variance }
}

pub fn backup(children: &[GaussianBelief], kind: NodeKind, config: &BackupConfig) -> Result<GaussianBelief, MathError> {
    match config.rule {
        BackupRule::Ep => backup_ep(children, kind, config.regularizer),
        BackupRule::Softmax => Ok(backup_softmax(children, kind)),
    }
}

/// Recomputes every interior ancestor of the changed nodes, deepest level
/// first, so that each parent sees final beliefs of all its children.
/// `summary` supplies the optional summary child of a node (appended after
/// the explored children). Returns the number of recomputed nodes.
pub fn refresh_values<S>(
    dag: &SearchDag<S>,
    values: &mut [GaussianBelief],
    changed: &[NodeId],
    config: &BackupConfig,
    summary: &dyn Fn(NodeId) -> Result<Option<GaussianBelief>, MathError>,
) -> Result<usize, MathError> {
    let mut marked = vec![false; dag.len()];
    let mut order: Vec<NodeId> = Vec::new();
    let mut stack: Vec<NodeId> = Vec::new();
    for &id in changed {
        stack.extend(dag.node(id).parents.iter().copied());
    }
    while let Some(p) = stack.pop() {
        if !marked[p] {
            marked[p] = true;
            order.push(p);
            stack.extend(dag.node(p).parents.iter().copied());
        }
    }
    order.sort_unstable_by_key(|&id| (std::cmp::Reverse(dag.node(id).level), id));

    let mut buf = Vec::new();
    let mut count = 0;
    for id in order {
        let node = dag.node(id);
        if node.status != NodeStatus::Interior || node.children.is_empty() {
            continue;
        }
        buf.clear();
        buf.extend(node.children.iter().map(|&c| values[c]));
        if config.summary_enabled {
            if let Some(s) = summary(id)? {
                buf.push(s);
            }
        }
        values[id] = backup(&buf, node.kind, config)?;
        count += 1;
    }
    Ok(count)
}
