//! Choose 5 of 30 grid pixels under an informativeness-with-redundancy
//! score; rewards are standardized from 20 pilot rollouts.
//!
//!     cargo run --release --example feature_selection [budget]

use probdag::domains::featsel::{FeatureSelectionDomain, RedundancyOracle};
use probdag::harness::report_pixels;
use probdag::oracles::exhaustive_best_leaf;
use probdag::{ProbSearch, SearchConfig, Searcher};

fn grid(features: &[u16]) -> String {
    (0..5)
        .map(|y| (0..6).map(|x| if features.contains(&(y * 6 + x)) { '#' } else { '.' }).collect::<String>())
        .collect::<Vec<_>>()
        .join("\n")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let budget: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(600);
    let oracle = RedundancyOracle::reference();
    let domain = FeatureSelectionDomain::new(30, 5, Box::new(oracle.clone()))?;

    let mut search = ProbSearch::new(
        &domain,
        SearchConfig { beta: 0.5, lambda: 1e-4, c: 0.2, pilot_rollouts: 20, budget, seed: 3, ..Default::default() },
    )?;
    let s = search.standardizer();
    println!("pilot: shift {:.4}, scale {:.4}", s.shift, s.scale);
    for _ in 0..budget {
        search.step()?;
    }
    let picked = report_pixels(&search, 5).ok_or("nothing observed")?;
    println!("after {budget} evaluations: {:?} reward {:.4}\n{}", picked.features, picked.reward, grid(&picked.features));

    let best = exhaustive_best_leaf(&domain, 1_000_000)?;
    println!("exhaustive optimum over {} bags: {:?} reward {:.4}\n{}", best.leaves, best.state.features(), best.reward, grid(best.state.features()));
    Ok(())
}
