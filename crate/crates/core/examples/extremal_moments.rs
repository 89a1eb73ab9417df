//! Gaussian approximations to the maximum and minimum of correlated
//! Gaussians, checked against sampling.
//!
//!     cargo run --release --example extremal_moments

use probdag::extremal::CorrelationMatrix;
use probdag::oracles::mc_extremal_moments;
use probdag::{extremum_of_set, max_moments_pair, min_moments_pair, BivariatePair, ExtremalPrior, Extremum, GaussianBelief};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = GaussianBelief::new(0.3, 1.0)?;
    let b = GaussianBelief::new(-0.2, 0.5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    println!("pair a={a}, b={b}");
    for rho in [-0.8, 0.0, 0.8] {
        let pair = BivariatePair::new(a, b, rho)?;
        let max = max_moments_pair(pair, ExtremalPrior::None)?;
        let min = min_moments_pair(pair, ExtremalPrior::None)?;
        let corr = CorrelationMatrix::new(2, vec![1.0, rho, rho, 1.0])?;
        let mc = mc_extremal_moments(&[a, b], Some(&corr), ExtremalPrior::None, Extremum::Max, 200_000, &mut rng);
        println!(
            "  rho={rho:+.1}  max ~ {max}  (sampled mean {:.4}, variance {:.4})  min ~ {min}",
            mc.mean,
            mc.std * mc.std
        );
    }

    // a prior on the extremum itself is multiplied in at the end
    let prior = ExtremalPrior::standard_normal();
    let pair = BivariatePair::independent(a, b);
    println!("max with N(0,1) prior: {}", max_moments_pair(pair, prior)?);

    // folding over a set of siblings, as done at every interior node
    let children: Vec<GaussianBelief> =
        (0..6).map(|i| GaussianBelief::new(0.1 * i as f64, 0.2 + 0.1 * i as f64)).collect::<Result<_, _>>()?;
    let folded = extremum_of_set(&children, None, ExtremalPrior::None, Extremum::Max)?;
    let mc = mc_extremal_moments(&children, None, ExtremalPrior::None, Extremum::Max, 200_000, &mut rng);
    println!("max of 6 independent children ~ {folded} (sampled mean {:.4}, variance {:.4})", mc.mean, mc.std * mc.std);
    Ok(())
}
