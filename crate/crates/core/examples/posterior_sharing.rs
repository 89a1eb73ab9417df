//! One rollout reward informs states that share features with the observed
//! leaf, even ones never visited.
//!
//!     cargo run --release --example posterior_sharing

use probdag::domains::featsel::BagKernel;
use probdag::{FeatureBag, GpConfig, Kernel, PosteriorState};

fn bag(f: &[u16]) -> FeatureBag {
    FeatureBag::from_unsorted(f.to_vec())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kernel = BagKernel;
    let mut post = PosteriorState::new(GpConfig { scale: 0.25, noise: 0.01, jitter: 1e-6 })?;
    let probes = [bag(&[2]), bag(&[7]), bag(&[2, 9]), bag(&[5, 7]), bag(&[1, 2, 3])];

    let show = |post: &PosteriorState<FeatureBag>, title: &str| {
        println!("{title}");
        for p in &probes {
            println!("  {:?}: {}", p.features(), post.marginal(&kernel, p));
        }
    };
    show(&post, "prior");

    // a good leaf containing feature 2, a poor one containing 7
    let good = bag(&[1, 2, 3]);
    post.add_observation(&kernel, good.key(), good.clone(), 1.5)?;
    let poor = bag(&[4, 6, 7]);
    post.add_observation(&kernel, poor.key(), poor, -1.0)?;
    show(&post, "after two rewards");

    println!("cov({{2}}, {{1,2,3}}) = {}", kernel.cov(&bag(&[2]), &good));
    Ok(())
}
