use proptest::prelude::*;

use probdag::domains::synthetic::SyntheticDomain;
use probdag::domains::tictactoe::{MinimaxOracle, TttState, X};
use probdag::engine::select_ucb;
use probdag::harness::mean_std;
use probdag::oracles::negamax;
use probdag::posterior::standardize_from_pilot;
use probdag::{
    build_delta_table, max_moments_pair, min_moments_pair, BivariatePair, DeltaConfig, Domain, ExtremalPrior,
    FeatureBag, GaussianBelief, GpConfig, NodeKind, PosteriorState,
};

fn belief() -> impl Strategy<Value = GaussianBelief> {
    (-3.0..3.0f64, 0.05..4.0f64).prop_map(|(m, v)| GaussianBelief::new(m, v).unwrap())
}

fn pair() -> impl Strategy<Value = BivariatePair> {
    (belief(), belief(), -0.95..0.95f64).prop_map(|(a, b, r)| BivariatePair::new(a, b, r).unwrap())
}

fn bag(max: u16, size: usize) -> impl Strategy<Value = FeatureBag> {
    proptest::sample::subsequence((0..max).collect::<Vec<_>>(), size).prop_map(FeatureBag::from_unsorted)
}

proptest! {
    #[test]
    fn min_is_negated_max_of_negations(p in pair()) {
        let min = min_moments_pair(p, ExtremalPrior::None).unwrap();
        let neg = BivariatePair::new(-p.a, -p.b, p.correlation).unwrap();
        let max = max_moments_pair(neg, ExtremalPrior::None).unwrap();
        prop_assert!((min.mean + max.mean).abs() < 1e-12);
        prop_assert!((min.variance - max.variance).abs() < 1e-12);
    }

    #[test]
    fn max_mean_dominates_both_inputs(p in pair()) {
        let max = max_moments_pair(p, ExtremalPrior::None).unwrap();
        prop_assert!(max.mean >= p.a.mean.max(p.b.mean) - 1e-12);
        prop_assert!(max.variance > 0.0 && max.variance.is_finite());
        let min = min_moments_pair(p, ExtremalPrior::None).unwrap();
        prop_assert!(min.mean <= p.a.mean.min(p.b.mean) + 1e-12);
        prop_assert!(min.mean <= max.mean);
    }

    #[test]
    fn prior_keeps_moments_finite(p in pair(), prior in belief()) {
        let m = max_moments_pair(p, ExtremalPrior::Gaussian(prior)).unwrap();
        prop_assert!(m.mean.is_finite() && m.variance > 0.0 && m.variance.is_finite());
    }

    #[test]
    fn all_max_delta_grows_with_depth(depth in 1usize..7, branching in 2usize..6, step in 0.05..2.0f64) {
        let table = build_delta_table(DeltaConfig::uniform(depth, branching, step, ExtremalPrior::None)).unwrap();
        let e = table.entries();
        prop_assert_eq!(e.len(), depth + 1);
        prop_assert_eq!(e[0].mean, 0.0);
        for w in e.windows(2) {
            prop_assert!(w[1].mean > w[0].mean);
        }
        prop_assert!(e[1..].iter().all(|d| d.variance > 0.0 && d.is_valid()));
    }

    #[test]
    fn posterior_never_exceeds_prior_variance(
        leaves in proptest::collection::vec(bag(15, 5), 1..40),
        probes in proptest::collection::vec((0usize..=5).prop_flat_map(|k| bag(15, k)), 1..10),
    ) {
        let domain = SyntheticDomain::new(15, 5, 2).unwrap();
        let kernel = domain.kernel();
        let mut post = PosteriorState::new(GpConfig { scale: 0.2, noise: 1e-3, jitter: 1e-6 }).unwrap();
        for leaf in leaves {
            let r = domain.reward(&leaf).unwrap();
            post.add_observation(kernel, leaf.key(), leaf, r).unwrap();
            for p in &probes {
                let m = post.marginal(kernel, p);
                prop_assert!(m.variance >= 0.0);
                prop_assert!(m.variance <= 0.2 * kernel.cov(p, p) + 1e-8);
            }
        }
    }

    #[test]
    fn feature_bags_ignore_order_and_duplicates(mut f in proptest::collection::vec(0u16..40, 0..10)) {
        let a = FeatureBag::from_unsorted(f.clone());
        f.reverse();
        f.extend_from_slice(&f.clone());
        let b = FeatureBag::from_unsorted(f);
        prop_assert_eq!(a.key(), b.key());
        prop_assert!(a.features().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn zero_exploration_picks_best_mean(means in proptest::collection::vec(-5.0..5.0f64, 1..8), visits in 0u64..100) {
        let values: Vec<_> = means.iter().map(|&m| GaussianBelief::new(m, 1.0).unwrap()).collect();
        let ids: Vec<usize> = (0..values.len()).collect();
        let hi = select_ucb(NodeKind::Max, visits, &ids, &values, 0.0).unwrap();
        let lo = select_ucb(NodeKind::Min, visits, &ids, &values, 0.0).unwrap();
        prop_assert!(means.iter().all(|&m| m <= means[hi]));
        prop_assert!(means.iter().all(|&m| m >= means[lo]));
    }

    #[test]
    fn standardized_pilot_has_unit_spread(r in proptest::collection::vec(-10.0..10.0f64, 2..50)) {
        prop_assume!(r.iter().any(|&x| (x - r[0]).abs() > 1e-3));
        let s = standardize_from_pilot(&r).unwrap();
        let z: Vec<f64> = r.iter().map(|&x| s.apply(x)).collect();
        let (mean, std) = mean_std(&z);
        prop_assert!(mean.abs() < 1e-9);
        prop_assert!((std - 1.0).abs() < 1e-9);
    }

    #[test]
    fn minimax_agrees_with_negamax(moves in proptest::collection::vec(0usize..9, 0..9)) {
        let oracle = MinimaxOracle::new();
        let mut state = TttState::empty();
        for m in moves {
            if state.is_over() {
                break;
            }
            let legal = state.legal_moves();
            state = state.play(legal[m % legal.len()]);
        }
        let sign = if state.to_move() == X { 1 } else { -1 };
        prop_assert_eq!(oracle.value_for_x(&state).unwrap(), sign * negamax(&state));
    }
}
