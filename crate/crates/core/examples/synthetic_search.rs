//! Probabilistic DAG search against UCT and UCD on the synthetic
//! feature-bag problem (15 features, bags of 5), same budget and seed.
//!
//!     cargo run --release --example synthetic_search [budget]

use probdag::baselines::{CountConfig, CountMethod, CountSearch, RaveConfig};
use probdag::domains::synthetic::SyntheticDomain;
use probdag::oracles::exhaustive_best_leaf;
use probdag::{ProbSearch, Representation, SearchConfig, Searcher};

fn trace(name: &str, search: &mut dyn Searcher<probdag::FeatureBag>, budget: usize) -> probdag::Result<()> {
    let mut line = format!("{name:<10}");
    for i in 1..=budget {
        search.step()?;
        if i % (budget / 5).max(1) == 0 {
            line += &format!("  {i}:{:.4}", search.best().map_or(f64::NAN, |b| b.reward));
        }
    }
    println!("{line}   ({} nodes)", search.dag().len());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let budget: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(300);
    let domain = SyntheticDomain::new(15, 5, 0)?;
    let best = exhaustive_best_leaf(&domain, 10_000)?;
    println!("best of {} leaves: {:.4} at {:?}", best.leaves, best.reward, best.state.features());

    let prob = SearchConfig { beta: 1.0, lambda: 1e-4, c: 1.0, budget, seed: 1, ..Default::default() };
    trace("prob-dag", &mut ProbSearch::new(&domain, prob.clone())?, budget)?;
    let tree = SearchConfig { representation: Representation::Tree, ..prob };
    trace("prob-tree", &mut ProbSearch::new(&domain, tree)?, budget)?;
    for (name, method) in [("uct", CountMethod::Uct), ("ucd", CountMethod::Ucd)] {
        let cfg = CountConfig { method, beta: 0.1, seed: 1, pilot_rollouts: 0, rave: RaveConfig::default() };
        trace(name, &mut CountSearch::new(&domain, cfg)?, budget)?;
    }
    Ok(())
}
