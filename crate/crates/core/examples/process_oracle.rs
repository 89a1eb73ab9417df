//! Plug an external evaluator into feature selection. The evaluator is any
//! program reading one line of space-separated feature indices and
//! answering one line with a number; here this example re-runs itself with
//! `--serve` to play that role.
//!
//!     cargo run --release --example process_oracle

use std::io::{BufRead, Write};

use probdag::domains::featsel::{FeatureSelectionDomain, ProcessOracle};
use probdag::{ProbSearch, SearchConfig, Searcher};

fn serve() -> std::io::Result<()> {
    let stdin = std::io::stdin();
    let mut out = std::io::stdout().lock();
    for line in stdin.lock().lines() {
        let feats: Vec<f64> = line?.split_whitespace().filter_map(|t| t.parse().ok()).collect();
        // prefers features near 4 and 11
        let score: f64 = feats.iter().map(|&f| (-(f - 4.0).powi(2) / 4.0).exp() + (-(f - 11.0).powi(2) / 4.0).exp()).sum();
        writeln!(out, "{score}")?;
        out.flush()?;
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    if std::env::args().nth(1).as_deref() == Some("--serve") {
        return Ok(serve()?);
    }
    let me = std::env::current_exe()?;
    let oracle = ProcessOracle::spawn(me.to_str().ok_or("non-UTF-8 path")?, &["--serve".to_string()], true)?;
    let domain = FeatureSelectionDomain::new(14, 3, Box::new(oracle))?;
    let mut search =
        ProbSearch::new(&domain, SearchConfig { beta: 0.5, c: 1.0 / 3.0, pilot_rollouts: 10, budget: 150, ..Default::default() })?;
    for _ in 0..150 {
        search.step()?;
    }
    let best = search.best().ok_or("no evaluations")?;
    println!("best bag {:?} with score {:.4}", best.state.features(), best.reward);
    Ok(())
}
