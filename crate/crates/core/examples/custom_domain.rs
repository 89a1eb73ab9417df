//! A new problem only needs the `Domain` trait and a kernel. Here: choose
//! three of eight items (a DAG, since order does not matter) to maximize a
//! made-up value, with items that share a parity correlated a priori.
//!
//!     cargo run --release --example custom_domain

use probdag::error::DomainError;
use probdag::{Domain, FeatureBag, Kernel, NodeKind, ProbSearch, SearchConfig, Searcher, StateKey};

struct ParityKernel;

impl Kernel<FeatureBag> for ParityKernel {
    fn cov(&self, a: &FeatureBag, b: &FeatureBag) -> f64 {
        let same = a.intersection_count(b) as f64;
        let parity = |x: &FeatureBag| x.features().iter().filter(|&&f| f % 2 == 0).count() as f64;
        (same + 0.5 * parity(a).min(parity(b)) + if a == b { 1.0 } else { 0.0 }) / 4.0
    }

    fn level_increment(&self) -> f64 {
        0.25
    }
}

struct PickThree;

impl Domain for PickThree {
    type State = FeatureBag;

    fn name(&self) -> &str {
        "pick-three"
    }
    fn root(&self) -> FeatureBag {
        FeatureBag::empty()
    }
    fn successors(&self, s: &FeatureBag) -> Vec<FeatureBag> {
        if s.len() == 3 { Vec::new() } else { s.extensions(8) }
    }
    fn is_terminal(&self, s: &FeatureBag) -> bool {
        s.len() == 3
    }
    fn reward(&self, s: &FeatureBag) -> Result<f64, DomainError> {
        Ok(s.features().iter().map(|&f| if f % 2 == 0 { 1.0 + f as f64 / 10.0 } else { 0.2 }).sum())
    }
    fn key(&self, s: &FeatureBag) -> StateKey {
        s.key()
    }
    fn node_kind(&self, _level: usize) -> NodeKind {
        NodeKind::Max
    }
    fn max_depth(&self) -> usize {
        3
    }
    fn branching(&self, level: usize) -> usize {
        8 - level
    }
    fn kernel(&self) -> &dyn Kernel<FeatureBag> {
        &ParityKernel
    }
    fn feature_bag<'a>(&self, s: &'a FeatureBag) -> Option<&'a FeatureBag> {
        Some(s)
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut search = ProbSearch::new(&PickThree, SearchConfig { beta: 1.0, c: 1.0, budget: 40, ..Default::default() })?;
    for _ in 0..40 {
        search.step()?;
    }
    let best = search.best().ok_or("no rollouts")?;
    println!("best after 40 rollouts: {:?} -> {:.2} ({} nodes explored)", best.state.features(), best.reward, search.dag().len());
    print!("{}", search.dag().export_text());
    Ok(())
}
