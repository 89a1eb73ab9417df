//! Problem instances behind one interface: a leveled state space with a
//! root, ordered successors, terminal rewards and a similarity kernel.

pub mod featsel;
pub mod synthetic;
pub mod tictactoe;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dag::{NodeKind, StateKey};
use crate::error::DomainError;
use crate::posterior::Kernel;

pub trait Domain: Send + Sync {
    type State: Clone + Send + Sync + std::fmt::Debug;

    fn name(&self) -> &str;
    fn root(&self) -> Self::State;
    /// Ordered, deterministic successor list; empty for terminals.
    fn successors(&self, state: &Self::State) -> Vec<Self::State>;
    fn is_terminal(&self, state: &Self::State) -> bool;
    /// Reward of a terminal state, from the MAX player's point of view.
    fn reward(&self, state: &Self::State) -> Result<f64, DomainError>;
    fn key(&self, state: &Self::State) -> StateKey;
    fn node_kind(&self, level: usize) -> NodeKind;
    /// Maximum distance from the root to any terminal.
    fn max_depth(&self) -> usize;
    /// Number of successors of a non-terminal node at `level`.
    fn branching(&self, level: usize) -> usize;
    fn kernel(&self) -> &dyn Kernel<Self::State>;

    /// Feature set of a state, for domains whose states are feature bags.
    fn feature_bag<'a>(&self, _state: &'a Self::State) -> Option<&'a FeatureBag> {
        None
    }

    /// One step of the uniform random rollout policy.
    fn random_successor(&self, state: &Self::State, rng: &mut dyn rand::RngCore) -> Option<Self::State> {
        let mut succ = self.successors(state);
        if succ.is_empty() {
            return None;
        }
        let i = rng.random_range(0..succ.len());
        Some(succ.swap_remove(i))
    }
}

/// A set of feature indices, kept sorted so that insertion order never
/// matters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct FeatureBag(Vec<u16>);

impl FeatureBag {
    pub fn empty() -> Self {
        FeatureBag(Vec::new())
    }

    pub fn from_unsorted(mut features: Vec<u16>) -> Self {
        features.sort_unstable();
        features.dedup();
        FeatureBag(features)
    }

    pub fn features(&self) -> &[u16] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, f: u16) -> bool {
        self.0.binary_search(&f).is_ok()
    }

    pub fn with(&self, f: u16) -> Self {
        let mut v = self.0.clone();
        if let Err(pos) = v.binary_search(&f) {
            v.insert(pos, f);
        }
        FeatureBag(v)
    }

    pub fn intersection_count(&self, other: &FeatureBag) -> usize {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    /// The single feature in `self` that is not in `parent`, when `self`
    /// extends `parent` by exactly one feature.
    pub fn added_over(&self, parent: &FeatureBag) -> Option<u16> {
        if self.len() != parent.len() + 1 {
            return None;
        }
        self.0.iter().copied().find(|f| !parent.contains(*f))
    }

    pub fn key(&self) -> StateKey {
        let mut bytes = Vec::with_capacity(self.0.len() * 2);
        for f in &self.0 {
            bytes.extend_from_slice(&f.to_le_bytes());
        }
        StateKey::new(bytes)
    }

    /// Successor bags in feature-index order.
    pub fn extensions(&self, n_features: usize) -> Vec<FeatureBag> {
        (0..n_features as u16).filter(|f| !self.contains(*f)).map(|f| self.with(f)).collect()
    }

    /// Uniformly random extension by a feature not yet in the bag.
    pub fn random_extension(&self, n_features: usize, rng: &mut dyn rand::RngCore) -> Option<FeatureBag> {
        let free = n_features.checked_sub(self.len())?;
        if free == 0 {
            return None;
        }
        let mut skip = rng.random_range(0..free);
        for f in 0..n_features as u16 {
            if !self.contains(f) {
                if skip == 0 {
                    return Some(self.with(f));
                }
                skip -= 1;
            }
        }
        None
    }
}

/// `n choose k` as f64 (exact for the sizes used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
