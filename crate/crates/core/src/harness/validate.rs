//! Monte-Carlo cross-checks of the extremal moments and the `Δ` table.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dag::NodeKind;
use crate::delta::{build_delta_table, DeltaConfig};
use crate::extremal::{
    extremum_of_set, max_moments_pair, min_moments_pair, BivariatePair, CorrelationMatrix, ExtremalPrior, Extremum,
};
use crate::gaussian::GaussianBelief;
use crate::oracles::{mc_extremal_moments, OracleReport};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, passed: bool, detail: String) -> Self {
        Self { name: name.into(), passed, detail }
    }
}

/// One randomized pairwise configuration.
#[derive(Debug, Clone, Copy)]
pub struct PairCase {
    pub pair: BivariatePair,
    pub prior: ExtremalPrior,
    pub kind: Extremum,
}

/// Means in [-3, 3], variances in [0.1, 4], correlation in [-0.9, 0.9]; half
/// of the cases carry a prior with mean in [-2, 2] and variance in [0.25, 4].
pub fn random_pair_cases(count: usize, seed: u64) -> Vec<PairCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let belief = |rng: &mut ChaCha8Rng| GaussianBelief {
                mean: rng.random_range(-3.0..=3.0),
                variance: rng.random_range(0.1..=4.0),
            };
            let (a, b) = (belief(&mut rng), belief(&mut rng));
            let rho = rng.random_range(-0.9..=0.9);
            let prior = if i % 2 == 1 {
                ExtremalPrior::Gaussian(GaussianBelief {
                    mean: rng.random_range(-2.0..=2.0),
                    variance: rng.random_range(0.25..=4.0),
                })
            } else {
                ExtremalPrior::None
            };
            let kind = if rng.random_bool(0.5) { Extremum::Max } else { Extremum::Min };
            PairCase { pair: BivariatePair::new(a, b, rho).expect("valid by construction"), prior, kind }
        })
        .collect()
}

fn pair_moments(case: &PairCase) -> GaussianBelief {
    match case.kind {
        Extremum::Max => max_moments_pair(case.pair, case.prior),
        Extremum::Min => min_moments_pair(case.pair, case.prior),
    }
    .expect("valid by construction")
}

fn pair_oracle(case: &PairCase, samples: usize, rng: &mut ChaCha8Rng) -> OracleReport {
    let r = case.pair.correlation;
    let corr = CorrelationMatrix::new(2, vec![1.0, r, r, 1.0]).expect("|r| < 1");
    mc_extremal_moments(&[case.pair.a, case.pair.b], Some(&corr), case.prior, case.kind, samples, rng)
}

/// Compares moment-matched pairs against the Monte-Carlo oracle; each moment
/// must agree within `3 se + 0.02`.
pub fn extremal_fidelity(cases: &[PairCase], samples: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, case) in cases.iter().enumerate() {
        let got = pair_moments(case);
        let mc = pair_oracle(case, samples, &mut rng);
        let mean_err = (got.mean - mc.mean).abs();
        let std_err = (got.std_dev() - mc.std).abs();
        let (mean_tol, std_tol) = (3.0 * mc.mean_se + 0.02, 3.0 * mc.std_se + 0.02);
        worst = worst.max(mean_err / mean_tol).max(std_err / std_tol);
        if mean_err > mean_tol || std_err > std_tol || !mc.reliable {
            failures.push(format!(
                "case {i} {:?}: got {got}, oracle N({:.4}, sd {:.4}) ess {:.0}",
                case, mc.mean, mc.std, mc.effective_samples
            ));
        }
    }
    CheckOutcome::new(
        "extremal moments vs Monte Carlo",
        failures.is_empty(),
        format!(
            "{} cases x {samples} samples, worst error / tolerance {worst:.3}{}",
            cases.len(),
            if failures.is_empty() { String::new() } else { format!("; failures: {}", failures.join("; ")) }
        ),
    )
}

/// `min(a, b) = -max(-a, -b)` and, without a prior, the mean of the maximum
/// dominates both input means (the minimum is dominated by both).
pub fn duality_and_dominance(cases: &[PairCase]) -> CheckOutcome {
    let mut failures = Vec::new();
    for (i, case) in cases.iter().enumerate() {
        let neg = BivariatePair::new(-case.pair.a, -case.pair.b, case.pair.correlation).expect("valid");
        let neg_prior = match case.prior {
            ExtremalPrior::None => ExtremalPrior::None,
            ExtremalPrior::Gaussian(p) => ExtremalPrior::Gaussian(-p),
        };
        let min = min_moments_pair(case.pair, case.prior).expect("valid");
        let mirrored = -max_moments_pair(neg, neg_prior).expect("valid");
        if (min.mean - mirrored.mean).abs() > 1e-12 || (min.variance - mirrored.variance).abs() > 1e-12 {
            failures.push(format!("case {i}: duality {min} vs {mirrored}"));
        }
        if case.prior == ExtremalPrior::None {
            let max = max_moments_pair(case.pair, ExtremalPrior::None).expect("valid");
            let (hi, lo) = (case.pair.a.mean.max(case.pair.b.mean), case.pair.a.mean.min(case.pair.b.mean));
            if max.mean < hi - 1e-12 || min.mean > lo + 1e-12 {
                failures.push(format!("case {i}: dominance max {max} min {min}"));
            }
        }
    }
    CheckOutcome::new(
        "duality and dominance",
        failures.is_empty(),
        format!("{} cases{}", cases.len(), if failures.is_empty() { String::new() } else { format!(": {}", failures.join("; ")) }),
    )
}

/// Max of two iid standard normals: mean `1/sqrt(pi)`, variance `1 - 1/pi`
/// within `1e-3`, and agreement with `samples` Monte-Carlo draws.
pub fn closed_form_pair(samples: usize, seed: u64) -> Vec<CheckOutcome> {
    let pi = std::f64::consts::PI;
    let std = GaussianBelief::standard();
    let got = max_moments_pair(BivariatePair::independent(std, std), ExtremalPrior::None).expect("valid");
    let (m, v) = (1.0 / pi.sqrt(), 1.0 - 1.0 / pi);
    let mut out = vec![CheckOutcome::new(
        "max of two iid N(0,1), closed form",
        (got.mean - m).abs() <= 1e-3 && (got.variance - v).abs() <= 1e-3,
        format!("got {got}, expected N({m:.6}, {v:.6})"),
    )];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mc = mc_extremal_moments(&[std, std], None, ExtremalPrior::None, Extremum::Max, samples, &mut rng);
    out.push(CheckOutcome::new(
        "max of two iid N(0,1), Monte Carlo",
        (mc.mean - m).abs() <= 4.0 * mc.mean_se + 1e-3 && (mc.std * mc.std - v).abs() <= 8.0 * mc.std * mc.std_se + 1e-3,
        format!("oracle mean {:.5} +- {:.5}, variance {:.5} from {samples} samples", mc.mean, mc.mean_se, mc.std * mc.std),
    ));
    out
}

/// Checks of the `Δ` recursion against closed forms and nested sampling.
pub fn delta_checks(samples: usize, seed: u64) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let none = ExtremalPrior::None;
    let pi = std::f64::consts::PI;

    let t = build_delta_table(DeltaConfig::uniform(1, 2, 1.0, none)).expect("valid");
    let e = t.entries()[1];
    out.push(CheckOutcome::new(
        "delta: one level, two options",
        (e.mean - 1.0 / pi.sqrt()).abs() <= 1e-3 && (e.variance - (1.0 - 1.0 / pi)).abs() <= 1e-3,
        format!("entry 1 = {e}"),
    ));

    let t = build_delta_table(DeltaConfig::uniform(4, 1, 0.3, none)).expect("valid");
    let exact = t.entries().iter().enumerate().all(|(l, e)| e.mean.abs() < 1e-12 && (e.variance - 0.3 * l as f64).abs() < 1e-12);
    out.push(CheckOutcome::new("delta: Brownian accumulation", exact, format!("{:?}", t.entries())));

    // nested check: table[2] against the minimum of two draws of
    // table[1] + N(0, c)
    let cfg = DeltaConfig {
        depth: 2,
        branching: vec![2, 2],
        step_variance: 1.0,
        kinds: vec![NodeKind::Max, NodeKind::Min],
        prior: none,
    };
    let t = build_delta_table(cfg).expect("valid");
    let option = t.entries()[1] + GaussianBelief { mean: 0.0, variance: 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mc = mc_extremal_moments(&[option, option], None, none, Extremum::Min, samples, &mut rng);
    let e = t.entries()[2];
    out.push(CheckOutcome::new(
        "delta: MAX then MIN vs nested Monte Carlo",
        (e.mean - mc.mean).abs() <= 4.0 * mc.mean_se + 1e-3 && (e.std_dev() - mc.std).abs() <= 4.0 * mc.std_se + 1e-3,
        format!("entry 2 = {e}, oracle mean {:.4} sd {:.4}", mc.mean, mc.std),
    ));

    let mut monotone = true;
    let mut details = Vec::new();
    for (b, c) in [(2, 1.0), (3, 1.0), (5, 1.0), (5, 2.0)] {
        let t = build_delta_table(DeltaConfig::uniform(6, b, c, none)).expect("valid");
        let means: Vec<f64> = t.entries().iter().map(|e| e.mean).collect();
        monotone &= means.windows(2).all(|w| w[1] >= w[0]);
        details.push(format!("b={b} c={c}: top {:.4}", means[6]));
    }
    let tops: Vec<f64> = [(2, 1.0), (3, 1.0), (5, 1.0), (5, 2.0)]
        .iter()
        .map(|&(b, c)| build_delta_table(DeltaConfig::uniform(6, b, c, none)).expect("valid").entries()[6].mean)
        .collect();
    monotone &= tops.windows(2).all(|w| w[1] >= w[0]);
    out.push(CheckOutcome::new("delta: monotone in level, branching and c", monotone, details.join(", ")));

    let kinds = vec![NodeKind::Max, NodeKind::Min, NodeKind::Max, NodeKind::Min];
    let flipped: Vec<NodeKind> = kinds.iter().map(|k| if *k == NodeKind::Max { NodeKind::Min } else { NodeKind::Max }).collect();
    let mk = |kinds: Vec<NodeKind>| {
        build_delta_table(DeltaConfig { depth: 4, branching: vec![2, 3, 4, 5], step_variance: 0.5, kinds, prior: ExtremalPrior::standard_normal() })
            .expect("valid")
    };
    let (a, b) = (mk(kinds), mk(flipped));
    let mirrored = a
        .entries()
        .iter()
        .zip(b.entries())
        .all(|(x, y)| (x.mean + y.mean).abs() < 1e-12 && (x.variance - y.variance).abs() < 1e-12);
    out.push(CheckOutcome::new("delta: MIN/MAX mirror", mirrored, format!("{:?}", a.entries())));
    out
}

/// Three iid standard normals, with and without a standard normal prior on
/// the maximum, against the sampled truth (tolerance 0.02 on the mean and
/// 0.03 on the variance).
pub fn three_way_checks(samples: usize, seed: u64) -> Vec<CheckOutcome> {
    let std = GaussianBelief::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    [ExtremalPrior::None, ExtremalPrior::standard_normal()]
        .into_iter()
        .map(|prior| {
            let got = extremum_of_set(&[std; 3], None, prior, Extremum::Max).expect("valid");
            let mc = mc_extremal_moments(&[std; 3], None, prior, Extremum::Max, samples, &mut rng);
            CheckOutcome::new(
                format!("max of three iid N(0,1), prior {}", if prior == ExtremalPrior::None { "none" } else { "N(0,1)" }),
                (got.mean - mc.mean).abs() <= 0.02 && (got.variance - mc.std * mc.std).abs() <= 0.03,
                format!("got {got}, oracle mean {:.4} variance {:.4}", mc.mean, mc.std * mc.std),
            )
        })
        .collect()
}

/// Every suite; what `validate-math` runs.
pub fn validate_math(seed: u64) -> Vec<CheckOutcome> {
    let cases = random_pair_cases(200, seed);
    let mut out = vec![extremal_fidelity(&cases, 200_000, seed + 1), duality_and_dominance(&cases)];
    out.extend(closed_form_pair(10_000_000, seed + 2));
    out.extend(three_way_checks(1_000_000, seed + 3));
    out.extend(delta_checks(1_000_000, seed + 4));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        let cases = random_pair_cases(12, 7);
        assert_eq!(cases.iter().filter(|c| c.prior != ExtremalPrior::None).count(), 6);
        for check in [extremal_fidelity(&cases, 50_000, 8), duality_and_dominance(&cases)]
            .into_iter()
            .chain(closed_form_pair(100_000, 9))
            .chain(delta_checks(100_000, 10))
        {
            assert!(check.passed, "{check:?}");
        }
    }
}
