//! Synthetic feature-bag DAG with Gaussian ground-truth leaf rewards.
//!
//! Nodes are subsets of `{0..N}` with at most `m` elements, edges add one
//! feature. The prior covariance between two bags is
//! `(|x1 ∩ x2| + 1) / (m + 1)`, and leaf rewards are one joint sample from
//! that Gaussian.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::collections::HashMap;

use super::{Domain, FeatureBag};
use crate::dag::{NodeKind, StateKey};
use crate::error::DomainError;
use crate::posterior::Kernel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub n_features: usize,
    pub bag_size: usize,
    pub ground_truth_seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self { n_features: 15, bag_size: 5, ground_truth_seed: 0 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SyntheticKernel {
    bag_size: usize,
}

impl SyntheticKernel {
    pub fn new(bag_size: usize) -> Self {
        Self { bag_size }
    }
}

impl Kernel<FeatureBag> for SyntheticKernel {
    fn cov(&self, a: &FeatureBag, b: &FeatureBag) -> f64 {
        (a.intersection_count(b) + 1) as f64 / (self.bag_size + 1) as f64
    }

    fn level_increment(&self) -> f64 {
        1.0 / (self.bag_size + 1) as f64
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticDomain {
    spec: SyntheticSpec,
    kernel: SyntheticKernel,
    // reward(x) = (z_0 + sum_{f in x} z_{f+1}) / sqrt(m + 1)
    factors: Vec<f64>,
}

impl SyntheticDomain {
    pub fn new(n_features: usize, bag_size: usize, ground_truth_seed: u64) -> Result<Self, DomainError> {
        Self::from_spec(SyntheticSpec { n_features, bag_size, ground_truth_seed })
    }

    /// Draws the ground truth. The leaf Gram factorizes exactly as
    /// `F Fᵀ` with `F` the rows `[1, indicator(x)] / sqrt(m + 1)`, so one
    /// standard-normal draw per feature plus one shared draw produces an
    /// exact sample of `N(0, Σ)` over all leaves.
    pub fn from_spec(spec: SyntheticSpec) -> Result<Self, DomainError> {
        if spec.bag_size == 0 || spec.bag_size > spec.n_features || spec.n_features > u16::MAX as usize {
            return Err(DomainError::Invalid(format!(
                "need 0 < m <= N, got N = {}, m = {}",
                spec.n_features, spec.bag_size
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.ground_truth_seed);
        let norm = ((spec.bag_size + 1) as f64).sqrt();
        let factors = (0..=spec.n_features)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z / norm
            })
            .collect();
        Ok(Self { spec, kernel: SyntheticKernel::new(spec.bag_size), factors })
    }

    pub fn spec(&self) -> SyntheticSpec {
        self.spec
    }

    fn leaf_reward(&self, bag: &FeatureBag) -> f64 {
        self.factors[0] + bag.features().iter().map(|&f| self.factors[f as usize + 1]).sum::<f64>()
    }
}

/// Reward of every size-`m` bag for the given ground-truth seed.
pub fn synthetic_ground_truth(spec: SyntheticSpec) -> Result<HashMap<FeatureBag, f64>, DomainError> {
    let domain = SyntheticDomain::from_spec(spec)?;
    let mut out = HashMap::new();
    let mut stack = vec![FeatureBag::empty()];
    while let Some(bag) = stack.pop() {
        if bag.len() == spec.bag_size {
            let r = domain.leaf_reward(&bag);
            out.insert(bag, r);
            continue;
        }
        // extend only with features above the current maximum: each subset once
        let start = bag.features().last().map_or(0, |&f| f as usize + 1);
        for f in start..spec.n_features {
            stack.push(bag.with(f as u16));
        }
    }
    Ok(out)
}

impl Domain for SyntheticDomain {
    type State = FeatureBag;

    fn name(&self) -> &str {
        "synthetic"
    }

    fn root(&self) -> FeatureBag {
        FeatureBag::empty()
    }

    fn successors(&self, state: &FeatureBag) -> Vec<FeatureBag> {
        if state.len() >= self.spec.bag_size {
            return Vec::new();
        }
        state.extensions(self.spec.n_features)
    }

    fn is_terminal(&self, state: &FeatureBag) -> bool {
        state.len() >= self.spec.bag_size
    }

    fn reward(&self, state: &FeatureBag) -> Result<f64, DomainError> {
        if !self.is_terminal(state) {
            return Err(DomainError::NotTerminal(format!("{:?}", state.features())));
        }
        Ok(self.leaf_reward(state))
    }

    fn key(&self, state: &FeatureBag) -> StateKey {
        state.key()
    }

    fn node_kind(&self, _level: usize) -> NodeKind {
        NodeKind::Max
    }

    fn max_depth(&self) -> usize {
        self.spec.bag_size
    }

    fn branching(&self, level: usize) -> usize {
        self.spec.n_features - level
    }

    fn kernel(&self) -> &dyn Kernel<FeatureBag> {
        &self.kernel
    }

    fn feature_bag<'a>(&self, state: &'a FeatureBag) -> Option<&'a FeatureBag> {
        Some(state)
    }

    fn random_successor(&self, state: &FeatureBag, rng: &mut dyn rand::RngCore) -> Option<FeatureBag> {
        if self.is_terminal(state) {
            return None;
        }
        state.random_extension(self.spec.n_features, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_truth_is_reproducible_and_complete() {
        let spec = SyntheticSpec::default();
        let a = synthetic_ground_truth(spec).unwrap();
        let b = synthetic_ground_truth(spec).unwrap();
        assert_eq!(a.len(), 3003);
        assert_eq!(a, b);
        let c = synthetic_ground_truth(SyntheticSpec { ground_truth_seed: 1, ..spec }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn empirical_correlation_of_bags_sharing_four_features() {
        let x = FeatureBag::from_unsorted(vec![0, 1, 2, 3, 4]);
        let y = FeatureBag::from_unsorted(vec![0, 1, 2, 3, 5]);
        let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let seeds = 2000;
        for seed in 0..seeds {
            let d = SyntheticDomain::new(15, 5, seed).unwrap();
            let (rx, ry) = (d.reward(&x).unwrap(), d.reward(&y).unwrap());
            sx += rx;
            sy += ry;
            sxx += rx * rx;
            syy += ry * ry;
            sxy += rx * ry;
        }
        let n = seeds as f64;
        let cov = sxy / n - sx * sy / n / n;
        let corr = cov / ((sxx / n - (sx / n).powi(2)) * (syy / n - (sy / n).powi(2))).sqrt();
        assert!((corr - 5.0 / 6.0).abs() < 0.05, "corr = {corr}");
    }

    #[test]
    fn kernel_gram_entries() {
        let k = SyntheticKernel::new(5);
        let x = FeatureBag::from_unsorted(vec![0, 1, 2, 3, 4]);
        let y = FeatureBag::from_unsorted(vec![0, 1, 7, 8, 9]);
        assert_eq!(k.cov(&x, &x), 1.0);
        assert_eq!(k.cov(&x, &y), 0.5);
        assert_eq!(k.cov(&x, &y), k.cov(&y, &x));
        assert_eq!(k.cov(&FeatureBag::empty(), &x), 1.0 / 6.0);
    }

    #[test]
    fn rewards_only_on_terminals() {
        let d = SyntheticDomain::new(15, 5, 0).unwrap();
        assert!(d.reward(&FeatureBag::empty()).is_err());
        assert!(d.successors(&FeatureBag::from_unsorted(vec![0, 1, 2, 3, 4])).is_empty());
        assert_eq!(d.branching(2), 13);
    }
}
