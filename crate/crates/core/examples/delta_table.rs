//! The per-depth belief about how much better the optimal leaf below a node
//! is than the node's own generative score.
//!
//!     cargo run --release --example delta_table

use probdag::domains::synthetic::SyntheticDomain;
use probdag::domains::tictactoe::TicTacToe;
use probdag::{build_delta_table, DeltaConfig, Domain, ExtremalPrior, NodeKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // all-MAX, 3 children per node, unit step variance
    let table = build_delta_table(DeltaConfig::uniform(4, 3, 1.0, ExtremalPrior::None))?;
    for (depth, d) in table.entries().iter().enumerate() {
        println!("remaining depth {depth}: {d}");
    }

    let synth = SyntheticDomain::new(15, 5, 0)?;
    let step = synth.kernel().level_increment();
    let table = build_delta_table(DeltaConfig::for_domain(&synth, step, ExtremalPrior::standard_normal()))?;
    println!("\nsynthetic (15 choose 5), step variance {step:.4}:");
    for l in 0..=synth.max_depth() {
        println!("  node at level {l}: {}", table.delta_for_boundary_node(synth.max_depth() - l));
    }

    // alternating MAX/MIN levels pull the increment back toward zero
    let game = TicTacToe::new();
    let cfg = DeltaConfig::for_domain(&game, 0.5 * game.kernel().level_increment(), ExtremalPrior::standard_normal());
    let kinds: String = cfg.kinds.iter().map(|k| if *k == NodeKind::Max { 'X' } else { 'O' }).collect();
    let table = build_delta_table(cfg)?;
    println!("\ntic-tac-toe, kinds from the leaves up: {kinds}");
    for (depth, d) in table.entries().iter().enumerate() {
        println!("  remaining depth {depth}: {d}");
    }
    Ok(())
}
