//! Feature-subset selection as DAG search: states are feature bags of size
//! at most `k`, terminals are size-`k` bags scored by a reward oracle.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use super::{Domain, FeatureBag};
use crate::dag::{NodeKind, StateKey};
use crate::error::DomainError;
use crate::posterior::Kernel;

/// Scores a complete feature bag (sorted feature indices).
pub trait RewardOracle: Send + Sync {
    fn evaluate(&self, bag: &[u16]) -> Result<f64, DomainError>;
    fn is_deterministic(&self) -> bool {
        true
    }
    /// Whether `evaluate` may be called from several threads at once.
    fn allows_concurrency(&self) -> bool {
        true
    }
}

/// Shared selected features, plus one on the diagonal.
#[derive(Debug, Clone, Copy, Default)]
pub struct BagKernel;

impl Kernel<FeatureBag> for BagKernel {
    fn cov(&self, a: &FeatureBag, b: &FeatureBag) -> f64 {
        let shared = a.intersection_count(b) as f64;
        if a == b {
            shared + 1.0
        } else {
            shared
        }
    }

    fn level_increment(&self) -> f64 {
        1.0
    }
}

pub struct FeatureSelectionDomain {
    n_features: usize,
    subset_size: usize,
    oracle: Box<dyn RewardOracle>,
}

impl std::fmt::Debug for FeatureSelectionDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FeatureSelectionDomain")
            .field("n_features", &self.n_features)
            .field("subset_size", &self.subset_size)
            .finish()
    }
}

static BAG_KERNEL: BagKernel = BagKernel;

impl FeatureSelectionDomain {
    /// Successors are generated lazily; nothing proportional to the state
    /// space is allocated.
    pub fn new(n_features: usize, subset_size: usize, oracle: Box<dyn RewardOracle>) -> Result<Self, DomainError> {
        if subset_size == 0 || subset_size > n_features || n_features > u16::MAX as usize {
            return Err(DomainError::Invalid(format!(
                "need 0 < k <= N, got N = {n_features}, k = {subset_size}"
            )));
        }
        Ok(Self { n_features, subset_size, oracle })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn subset_size(&self) -> usize {
        self.subset_size
    }

    pub fn oracle(&self) -> &dyn RewardOracle {
        self.oracle.as_ref()
    }
}

impl Domain for FeatureSelectionDomain {
    type State = FeatureBag;

    fn name(&self) -> &str {
        "featsel"
    }

    fn root(&self) -> FeatureBag {
        FeatureBag::empty()
    }

    fn successors(&self, state: &FeatureBag) -> Vec<FeatureBag> {
        if state.len() >= self.subset_size {
            return Vec::new();
        }
        state.extensions(self.n_features)
    }

    fn is_terminal(&self, state: &FeatureBag) -> bool {
        state.len() >= self.subset_size
    }

    fn reward(&self, state: &FeatureBag) -> Result<f64, DomainError> {
        if !self.is_terminal(state) {
            return Err(DomainError::NotTerminal(format!("{:?}", state.features())));
        }
        self.oracle.evaluate(state.features())
    }

    fn key(&self, state: &FeatureBag) -> StateKey {
        state.key()
    }

    fn node_kind(&self, _level: usize) -> NodeKind {
        NodeKind::Max
    }

    fn max_depth(&self) -> usize {
        self.subset_size
    }

    fn branching(&self, level: usize) -> usize {
        self.n_features - level
    }

    fn kernel(&self) -> &dyn Kernel<FeatureBag> {
        &BAG_KERNEL
    }

    fn feature_bag<'a>(&self, state: &'a FeatureBag) -> Option<&'a FeatureBag> {
        Some(state)
    }

    fn random_successor(&self, state: &FeatureBag, rng: &mut dyn rand::RngCore) -> Option<FeatureBag> {
        if self.is_terminal(state) {
            return None;
        }
        state.random_extension(self.n_features, rng)
    }
}

/// Reward = sum of the 1-based feature indices. Trivially maximized by the
/// `k` highest-indexed features.
#[derive(Debug, Clone, Copy, Default)]
pub struct IndexSumOracle;

impl RewardOracle for IndexSumOracle {
    fn evaluate(&self, bag: &[u16]) -> Result<f64, DomainError> {
        Ok(bag.iter().map(|&f| f as f64 + 1.0).sum())
    }
}

/// Accuracy-like score of pixels on a small grid. Each pixel carries an
/// informativeness made of a bump at the grid center plus a fixed
/// pseudo-random part; adjacent pixels are partly redundant, so the
/// individually most informative pixels are not the best bag.
///
/// `score = sum_i info_i - sum_{i<j} red(i, j) * min(info_i, info_j)` with
/// `red = 0.6` for edge neighbours, `0.3` for diagonal neighbours and 0
/// otherwise; the reward is `0.5 + score / 10`.
#[derive(Debug, Clone)]
pub struct RedundancyOracle {
    width: usize,
    info: Vec<f64>,
}

impl RedundancyOracle {
    /// The reference 6 x 5 grid (30 pixels).
    pub fn reference() -> Self {
        Self::new(6, 5)
    }

    pub fn new(width: usize, height: usize) -> Self {
        let (cx, cy) = ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0);
        let info = (0..width * height)
            .map(|i| {
                let (x, y) = ((i % width) as f64, (i / width) as f64);
                let d2 = (x - cx).powi(2) + (y - cy).powi(2);
                let u = (i as f64 * 0.618_034 + 0.3).fract();
                0.1 + 0.4 * (-d2 / (2.0 * 1.2 * 1.2)).exp() + 0.6 * u * u
            })
            .collect();
        Self { width, info }
    }

    pub fn n_features(&self) -> usize {
        self.info.len()
    }

    pub fn informativeness(&self, f: u16) -> f64 {
        self.info[f as usize]
    }

    fn redundancy(&self, a: u16, b: u16) -> f64 {
        let (a, b) = (a as usize, b as usize);
        let dx = (a % self.width).abs_diff(b % self.width);
        let dy = (a / self.width).abs_diff(b / self.width);
        match dx * dx + dy * dy {
            1 => 0.6,
            2 => 0.3,
            _ => 0.0,
        }
    }

    pub fn score(&self, bag: &[u16]) -> f64 {
        let mut s: f64 = bag.iter().map(|&f| self.info[f as usize]).sum();
        for (i, &a) in bag.iter().enumerate() {
            for &b in &bag[i + 1..] {
                s -= self.redundancy(a, b) * self.info[a as usize].min(self.info[b as usize]);
            }
        }
        s
    }
}

impl RewardOracle for RedundancyOracle {
    fn evaluate(&self, bag: &[u16]) -> Result<f64, DomainError> {
        if let Some(&f) = bag.iter().find(|&&f| f as usize >= self.info.len()) {
            return Err(DomainError::Oracle { bag: bag.to_vec(), reason: format!("feature {f} out of range") });
        }
        Ok(0.5 + self.score(bag) / 10.0)
    }
}

/// Oracle served by a child process over standard streams: one request line
/// per evaluation with the sorted feature indices separated by spaces, one
/// response line holding a single real number.
pub struct ProcessOracle {
    io: Mutex<(Child, ChildStdin, BufReader<ChildStdout>)>,
    deterministic: bool,
}

impl ProcessOracle {
    pub fn spawn(program: &str, args: &[String], deterministic: bool) -> Result<Self, DomainError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()?;
        let stdin = child.stdin.take().ok_or_else(|| DomainError::Invalid("no stdin on oracle process".into()))?;
        let stdout = child.stdout.take().ok_or_else(|| DomainError::Invalid("no stdout on oracle process".into()))?;
        Ok(Self { io: Mutex::new((child, stdin, BufReader::new(stdout))), deterministic })
    }
}

/// Encodes one request line.
pub fn encode_request(bag: &[u16]) -> String {
    let parts: Vec<String> = bag.iter().map(|f| f.to_string()).collect();
    parts.join(" ")
}

/// Decodes one response line.
pub fn decode_response(line: &str) -> Result<f64, String> {
    let v: f64 = line.trim().parse().map_err(|e| format!("bad oracle response {line:?}: {e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("non-finite oracle response {line:?}"))
    }
}

impl RewardOracle for ProcessOracle {
    fn evaluate(&self, bag: &[u16]) -> Result<f64, DomainError> {
        let fail = |reason: String| DomainError::Oracle { bag: bag.to_vec(), reason };
        let mut guard = self.io.lock().map_err(|_| fail("oracle lock poisoned".into()))?;
        let (_, stdin, stdout) = &mut *guard;
        writeln!(stdin, "{}", encode_request(bag)).map_err(|e| fail(e.to_string()))?;
        stdin.flush().map_err(|e| fail(e.to_string()))?;
        let mut line = String::new();
        let n = stdout.read_line(&mut line).map_err(|e| fail(e.to_string()))?;
        if n == 0 {
            return Err(fail("oracle process closed its output".into()));
        }
        decode_response(&line).map_err(fail)
    }

    fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    fn allows_concurrency(&self) -> bool {
        false
    }
}

impl Drop for ProcessOracle {
    fn drop(&mut self) {
        if let Ok(mut guard) = self.io.lock() {
            let _ = guard.0.kill();
            let _ = guard.0.wait();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bag_kernel_diagonal_rule() {
        let a = FeatureBag::from_unsorted(vec![1, 2, 3]);
        let b = FeatureBag::from_unsorted(vec![4, 5]);
        assert_eq!(BagKernel.cov(&a, &a), 4.0);
        assert_eq!(BagKernel.cov(&a, &b), 0.0);
        assert_eq!(BagKernel.cov(&b, &b), 3.0);
        assert_eq!(BagKernel.cov(&FeatureBag::empty(), &FeatureBag::empty()), 1.0);
    }

    #[test]
    fn large_domains_are_lazy() {
        let d = FeatureSelectionDomain::new(784, 10, Box::new(IndexSumOracle)).unwrap();
        assert_eq!(d.successors(&d.root()).len(), 784);
        assert_eq!(d.branching(3), 781);
        assert!(FeatureSelectionDomain::new(3, 4, Box::new(IndexSumOracle)).is_err());
    }

    #[test]
    fn top_k_by_informativeness_is_not_optimal() {
        let oracle = RedundancyOracle::reference();
        let mut order: Vec<u16> = (0..30).collect();
        order.sort_by(|a, b| oracle.informativeness(*b).total_cmp(&oracle.informativeness(*a)));
        let mut greedy = order[..5].to_vec();
        greedy.sort_unstable();
        let greedy_reward = oracle.evaluate(&greedy).unwrap();
        // a spread-out alternative beats the central cluster
        let best = crate::oracles::exhaustive_best_leaf(
            &FeatureSelectionDomain::new(30, 5, Box::new(oracle.clone())).unwrap(),
            1_000_000,
        )
        .unwrap();
        assert!(best.reward > greedy_reward + 0.01, "{} vs {}", best.reward, greedy_reward);
    }

    #[test]
    fn wire_format() {
        assert_eq!(encode_request(&[1, 5, 17]), "1 5 17");
        assert_eq!(decode_response(" 0.875\n"), Ok(0.875));
        assert!(decode_response("nan").is_err());
        assert!(decode_response("abc").is_err());
    }
}
