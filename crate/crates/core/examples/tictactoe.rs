//! Search Tic-Tac-Toe as X, then play the frozen result against the exact
//! minimax opponent. A perfect player draws (0).
//!
//!     cargo run --release --example tictactoe [budget]

use probdag::baselines::{CountConfig, CountMethod, CountSearch, RaveConfig};
use probdag::domains::tictactoe::{MinimaxOracle, TicTacToe, TttState};
use probdag::engine::{phase_rng, STREAM_EVAL};
use probdag::harness::{evaluate_adversarial, RandomPolicy, SearchPolicy};
use probdag::{ProbSearch, SearchConfig, Searcher};

fn evaluate(name: &str, search: &mut dyn Searcher<TttState>, budget: usize, oracle: &MinimaxOracle) -> Result<(), Box<dyn std::error::Error>> {
    let mut line = format!("{name:<8}");
    for i in 1..=budget {
        search.step()?;
        if i % (budget / 4).max(1) == 0 {
            let mut rng = phase_rng(0, STREAM_EVAL);
            let score = evaluate_adversarial(&SearchPolicy(&*search), oracle, 20, &mut rng)?;
            line += &format!("  {i}:{score:+.2}");
        }
    }
    println!("{line}");
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let budget: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1000);
    let game = TicTacToe::new();
    let oracle = MinimaxOracle::new();
    println!("value of the empty board: {}", oracle.value_for_x(&TttState::empty())?);

    let mut rng = phase_rng(0, STREAM_EVAL);
    println!("random X: {:+.2}", evaluate_adversarial(&RandomPolicy, &oracle, 1000, &mut rng)?);

    let cfg = SearchConfig { beta: 1.0, c: 0.5, lambda: 0.1, budget, seed: 0, ..Default::default() };
    evaluate("prob-dag", &mut ProbSearch::new(&game, cfg)?, budget, &oracle)?;
    let cfg = CountConfig { method: CountMethod::Ucd, beta: 1.0, seed: 0, pilot_rollouts: 0, rave: RaveConfig::default() };
    evaluate("ucd", &mut CountSearch::new(&game, cfg)?, budget, &oracle)?;
    Ok(())
}
