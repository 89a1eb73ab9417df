//! Moment-matched Gaussian approximations to the maximum (or minimum) of
//! jointly Gaussian variables, optionally combined with a Gaussian prior on
//! the extremum itself.
//!
//! For two variables `x1, x2` with prior `N(m; mu0, s0^2)` the density of the
//! maximum is the prior times a two-branch mixture: `m` follows `x1` on the
//! event `x2 < x1`, and `x2` on the complement. Each branch is a Gaussian
//! (the prior fused with the branch variable) truncated by a linear
//! constraint, so its first two moments are available in closed form:
//!
//! ```text
//! w_i  ∝ N(mu0; mu_i, s0^2 + s_i^2) Φ(k_i)
//! E_i  = mu_ci + s_ci (b_i / a_i) φ(k_i)/Φ(k_i)
//! E2_i = mu_ci^2 + s_ci^2 + [2 mu_ci s_ci b_i/a_i - k_i s_ci^2 b_i^2/a_i^2] φ(k_i)/Φ(k_i)
//! s_ci^2 = s_i^2 s0^2 / (s_i^2 + s0^2),  mu_ci = (mu_i/s_i^2 + mu0/s0^2) s_ci^2
//! a_i^2  = s_1^2 s_2^2 (1 - rho^2) + (s_i - rho s_j)^2 s_ci^2,  b_i = s_ci (s_i - rho s_j)
//! k_i    = [(s_i - rho s_j) mu_ci - s_i mu_j + rho s_j mu_i] / a_i
//! ```
//!
//! Without a prior (`s0 → ∞`) the fused quantities reduce to the branch
//! variable and the prior evidence drops out of the weights.
//!
//! The implementation carries `a_i` and `b_i` divided by `s_i` (the spread of
//! `x_j - x_i` after conditioning on the prior, and its covariance with the
//! branch variable), which is algebraically identical but stays finite when an
//! input has zero variance. Weights are normalized in the log domain.

use serde::{Deserialize, Serialize};

use crate::error::MathError;
use crate::gaussian::{inverse_mills, normal_log_pdf, std_normal_log_cdf, GaussianBelief};

/// Below this normalizer the two-branch density is numerically empty and the
/// dominant input is returned as is.
pub const Z_FLOOR: f64 = 1e-300;

/// Prior information on the extremum. `None` is the uninformative limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ExtremalPrior {
    #[default]
    None,
    Gaussian(GaussianBelief),
}

impl ExtremalPrior {
    pub fn standard_normal() -> Self {
        ExtremalPrior::Gaussian(GaussianBelief::standard())
    }

    fn validated(self) -> Result<Option<GaussianBelief>, MathError> {
        match self {
            ExtremalPrior::None => Ok(None),
            ExtremalPrior::Gaussian(b) if b.variance > 0.0 && b.is_valid() => Ok(Some(b)),
            ExtremalPrior::Gaussian(_) => Err(MathError::DegeneratePrior),
        }
    }

    fn negated(self) -> Self {
        match self {
            ExtremalPrior::None => ExtremalPrior::None,
            ExtremalPrior::Gaussian(b) => ExtremalPrior::Gaussian(-b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremum {
    Max,
    Min,
}

/// Two jointly Gaussian variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariatePair {
    pub a: GaussianBelief,
    pub b: GaussianBelief,
    pub correlation: f64,
}

impl BivariatePair {
    pub fn new(a: GaussianBelief, b: GaussianBelief, correlation: f64) -> Result<Self, MathError> {
        if !(-1.0..=1.0).contains(&correlation) || correlation.is_nan() {
            return Err(MathError::InvalidCorrelation(correlation));
        }
        if !a.is_valid() {
            return Err(MathError::InvalidBelief { mean: a.mean, variance: a.variance });
        }
        if !b.is_valid() {
            return Err(MathError::InvalidBelief { mean: b.mean, variance: b.variance });
        }
        Ok(Self { a, b, correlation })
    }

    pub fn independent(a: GaussianBelief, b: GaussianBelief) -> Self {
        Self { a, b, correlation: 0.0 }
    }

    fn negated(self) -> Self {
        Self { a: -self.a, b: -self.b, correlation: self.correlation }
    }
}

/// Symmetric, unit-diagonal, positive semidefinite matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self, MathError> {
        if data.len() != n * n {
            return Err(MathError::InvalidCorrelationMatrix(format!(
                "expected {} entries, got {}",
                n * n,
                data.len()
            )));
        }
        for i in 0..n {
            if (data[i * n + i] - 1.0).abs() > 1e-12 {
                return Err(MathError::InvalidCorrelationMatrix(format!("diagonal entry {i} is not 1")));
            }
            for j in 0..i {
                if (data[i * n + j] - data[j * n + i]).abs() > 1e-12 {
                    return Err(MathError::InvalidCorrelationMatrix(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        let shifted = nalgebra::DMatrix::from_fn(n, n, |i, j| data[i * n + j] + if i == j { 1e-10 } else { 0.0 });
        if nalgebra::Cholesky::new(shifted).is_none() {
            return Err(MathError::InvalidCorrelationMatrix("not positive semidefinite".into()));
        }
        Ok(Self { n, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

/// Moments of the maximum plus the branch weights (the probability mass of
/// "`a` is the maximum" and "`b` is the maximum" under the prior-weighted
/// density).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairMoments {
    pub belief: GaussianBelief,
    pub weights: [f64; 2],
}

struct Branch {
    log_weight: f64,
    mean: f64,
    variance: f64,
}

/// One branch of the mixture: `m` distributed like `x_i` on `x_j < x_i`.
fn branch(
    (mu_i, var_i): (f64, f64),
    (mu_j, var_j): (f64, f64),
    rho: f64,
    prior: Option<GaussianBelief>,
    wins_ties: bool,
) -> Branch {
    let (s_i, s_j) = (var_i.sqrt(), var_j.sqrt());
    // x_j - x_i: variance and covariance with x_i
    let diff_var = (var_i + var_j - 2.0 * rho * s_i * s_j).max(0.0);
    let diff_cov = rho * s_i * s_j - var_i;

    let (mu_c, var_c, cov_c, diff_mean, spread_var, log_evidence) = match prior {
        None => (mu_i, var_i, diff_cov, mu_j - mu_i, diff_var, 0.0),
        Some(p) => {
            let total = var_i + p.variance;
            let gain = var_i / total;
            let innovation = p.mean - mu_i;
            (
                mu_i + gain * innovation,
                var_i * p.variance / total,
                diff_cov * p.variance / total,
                (mu_j - mu_i) + diff_cov * innovation / total,
                (diff_var - diff_cov * diff_cov / total).max(0.0),
                normal_log_pdf(p.mean, mu_i, total),
            )
        }
    };

    let scale = var_i + var_j + 1.0;
    if spread_var <= 1e-14 * scale {
        // ordering is deterministic given the prior; the branch either holds surely or never
        let holds = if wins_ties { diff_mean <= 0.0 } else { diff_mean < 0.0 };
        return Branch {
            log_weight: if holds { log_evidence } else { f64::NEG_INFINITY },
            mean: mu_c,
            variance: var_c,
        };
    }

    let spread = spread_var.sqrt();
    let k = -diff_mean / spread;
    // s_c * b / a
    let lean = -cov_c / spread;
    let mills = inverse_mills(k);
    Branch {
        log_weight: log_evidence + std_normal_log_cdf(k),
        mean: mu_c + lean * mills,
        variance: (var_c - lean * lean * mills * (k + mills)).max(0.0),
    }
}

/// Max of two variables with branch weights. The prior must already be validated.
fn max_pair_weighted(pair: BivariatePair, prior: Option<GaussianBelief>) -> PairMoments {
    let (a, b) = (pair.a, pair.b);
    let rho = if a.variance == 0.0 || b.variance == 0.0 { 0.0 } else { pair.correlation };

    let first = branch((a.mean, a.variance), (b.mean, b.variance), rho, prior, true);
    let second = branch((b.mean, b.variance), (a.mean, a.variance), rho, prior, false);

    let top = first.log_weight.max(second.log_weight);
    let (e1, e2) = ((first.log_weight - top).exp(), (second.log_weight - top).exp());
    let log_z = top + (e1 + e2).ln();
    if !log_z.is_finite() || log_z < Z_FLOOR.ln() {
        let (belief, weights) = if a.mean >= b.mean { (a, [1.0, 0.0]) } else { (b, [0.0, 1.0]) };
        return PairMoments { belief, weights };
    }

    let (w1, w2) = (e1 / (e1 + e2), e2 / (e1 + e2));
    let mean = w1 * first.mean + w2 * second.mean;
    let (d1, d2) = (first.mean - mean, second.mean - mean);
    let variance = w1 * (first.variance + d1 * d1) + w2 * (second.variance + d2 * d2);
    PairMoments {
        belief: GaussianBelief { mean, variance: variance.max(0.0) },
        weights: [w1, w2],
    }
}

/// Moment-matched Gaussian of `max(a, b)` fused with the prior.
pub fn max_moments_pair(pair: BivariatePair, prior: ExtremalPrior) -> Result<GaussianBelief, MathError> {
    let pair = BivariatePair::new(pair.a, pair.b, pair.correlation)?;
    Ok(max_pair_weighted(pair, prior.validated()?).belief)
}

/// `min(a, b) = -max(-a, -b)`; a prior on the minimum is negated first.
pub fn min_moments_pair(pair: BivariatePair, prior: ExtremalPrior) -> Result<GaussianBelief, MathError> {
    Ok(-max_moments_pair(pair.negated(), prior.negated())?)
}

/// Same as [`max_moments_pair`] but also returns the branch weights.
pub fn max_pair_with_weights(pair: BivariatePair, prior: ExtremalPrior) -> Result<PairMoments, MathError> {
    let pair = BivariatePair::new(pair.a, pair.b, pair.correlation)?;
    Ok(max_pair_weighted(pair, prior.validated()?))
}

/// Extremum of a finite set by folding the pairwise approximation over the
/// inputs in the given order: `m_1 = x_1`, `m_{k+1} = ext(m_k, x_{k+1})`.
///
/// The prior enters once, in the last pairwise step (for a singleton it is
/// fused with the single input). With a correlation matrix, the covariance
/// between the running extremum and every later input is carried along as
/// `cov(m, x) = w_1 cov(m_prev, x) + w_2 cov(x_k, x)`, with `w` the branch
/// weights of the step; the independent case is `O(b)`, the correlated one
/// `O(b^2)`.
pub fn extremum_of_set(
    beliefs: &[GaussianBelief],
    correlations: Option<&CorrelationMatrix>,
    prior: ExtremalPrior,
    kind: Extremum,
) -> Result<GaussianBelief, MathError> {
    match kind {
        Extremum::Max => max_of_set(beliefs, correlations, prior),
        Extremum::Min => {
            let negated: Vec<GaussianBelief> = beliefs.iter().map(|b| -*b).collect();
            Ok(-max_of_set(&negated, correlations, prior.negated())?)
        }
    }
}

fn max_of_set(
    beliefs: &[GaussianBelief],
    correlations: Option<&CorrelationMatrix>,
    prior: ExtremalPrior,
) -> Result<GaussianBelief, MathError> {
    let (first, rest) = beliefs.split_first().ok_or(MathError::EmptySet)?;
    let prior = prior.validated()?;
    for b in beliefs {
        if !b.is_valid() {
            return Err(MathError::InvalidBelief { mean: b.mean, variance: b.variance });
        }
    }
    if let Some(r) = correlations {
        if r.dim() != beliefs.len() {
            return Err(MathError::InvalidCorrelationMatrix(format!(
                "dimension {} does not match {} beliefs",
                r.dim(),
                beliefs.len()
            )));
        }
    }

    if rest.is_empty() {
        return Ok(match prior {
            None => *first,
            Some(p) => fuse(*first, p),
        });
    }

    let stds: Vec<f64> = beliefs.iter().map(|b| b.std_dev()).collect();
    // covariance between the running maximum and each input
    let mut running_cov: Vec<f64> = match correlations {
        Some(r) => (0..beliefs.len()).map(|j| r.get(0, j) * stds[0] * stds[j]).collect(),
        None => Vec::new(),
    };

    let mut running = *first;
    let last = beliefs.len() - 1;
    for k in 1..beliefs.len() {
        let rho = match correlations {
            Some(_) => {
                let denom = running.std_dev() * stds[k];
                if denom > 0.0 {
                    (running_cov[k] / denom).clamp(-1.0, 1.0)
                } else {
                    0.0
                }
            }
            None => 0.0,
        };
        let step_prior = if k == last { prior } else { None };
        let moments = max_pair_weighted(
            BivariatePair { a: running, b: beliefs[k], correlation: rho },
            step_prior,
        );
        if let Some(r) = correlations {
            let [w1, w2] = moments.weights;
            for j in (k + 1)..beliefs.len() {
                running_cov[j] = w1 * running_cov[j] + w2 * r.get(k, j) * stds[k] * stds[j];
            }
        }
        running = moments.belief;
    }
    Ok(running)
}

/// Product of a Gaussian with a Gaussian prior, renormalized.
fn fuse(x: GaussianBelief, prior: GaussianBelief) -> GaussianBelief {
    let total = x.variance + prior.variance;
    GaussianBelief {
        mean: (x.mean * prior.variance + prior.mean * x.variance) / total,
        variance: x.variance * prior.variance / total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn n(mean: f64, variance: f64) -> GaussianBelief {
        GaussianBelief::new(mean, variance).unwrap()
    }

    #[test]
    fn max_of_two_iid_standard_normals_is_closed_form() {
        let out = max_moments_pair(BivariatePair::independent(n(0.0, 1.0), n(0.0, 1.0)), ExtremalPrior::None).unwrap();
        assert_abs_diff_eq!(out.mean, 1.0 / PI.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(out.variance, 1.0 - 1.0 / PI, epsilon = 1e-12);
    }

    #[test]
    fn perfectly_correlated_identical_variables() {
        let x = n(0.7, 2.5);
        let out = max_moments_pair(BivariatePair::new(x, x, 1.0).unwrap(), ExtremalPrior::None).unwrap();
        assert_abs_diff_eq!(out.mean, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(out.variance, 2.5, epsilon = 1e-12);

        let y = n(5.0, 2.0);
        let out = min_moments_pair(BivariatePair::new(y, y, 1.0).unwrap(), ExtremalPrior::None).unwrap();
        assert_abs_diff_eq!(out.mean, 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.variance, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn dominance_returns_the_dominant_variable() {
        let out = max_moments_pair(BivariatePair::independent(n(0.0, 1.0), n(-100.0, 1.0)), ExtremalPrior::None).unwrap();
        assert_abs_diff_eq!(out.mean, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(out.variance, 1.0, epsilon = 1e-6);

        let out = min_moments_pair(BivariatePair::independent(n(0.0, 1.0), n(100.0, 1.0)), ExtremalPrior::None).unwrap();
        assert_abs_diff_eq!(out.mean, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(out.variance, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn min_of_two_iid_standard_normals() {
        let out = min_moments_pair(BivariatePair::independent(n(0.0, 1.0), n(0.0, 1.0)), ExtremalPrior::None).unwrap();
        assert_abs_diff_eq!(out.mean, -1.0 / PI.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(out.variance, 1.0 - 1.0 / PI, epsilon = 1e-12);
    }

    #[test]
    fn point_masses_are_handled() {
        // max(0, N(0,1)) has mean φ(0) and second moment 1/2
        let out = max_moments_pair(BivariatePair::independent(n(0.0, 0.0), n(0.0, 1.0)), ExtremalPrior::None).unwrap();
        let phi0 = 1.0 / (2.0 * PI).sqrt();
        assert_abs_diff_eq!(out.mean, phi0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.variance, 0.5 - phi0 * phi0, epsilon = 1e-12);

        let out = max_moments_pair(BivariatePair::independent(n(1.0, 0.0), n(-1.0, 0.0)), ExtremalPrior::None).unwrap();
        assert_eq!(out, n(1.0, 0.0));
    }

    #[test]
    fn prior_shrinks_toward_its_mean() {
        let pair = BivariatePair::independent(n(0.0, 1.0), n(0.0, 1.0));
        let with = max_moments_pair(pair, ExtremalPrior::standard_normal()).unwrap();
        assert!(with.mean < 1.0 / PI.sqrt());
        assert!(with.variance < 1.0 - 1.0 / PI);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(BivariatePair::new(n(0.0, 1.0), n(0.0, 1.0), 1.5).is_err());
        let bad = BivariatePair { a: n(0.0, 1.0), b: n(0.0, 1.0), correlation: -2.0 };
        assert_eq!(max_moments_pair(bad, ExtremalPrior::None), Err(MathError::InvalidCorrelation(-2.0)));
        let prior = ExtremalPrior::Gaussian(GaussianBelief::point(0.0));
        assert_eq!(
            max_moments_pair(BivariatePair::independent(n(0.0, 1.0), n(0.0, 1.0)), prior),
            Err(MathError::DegeneratePrior)
        );
        assert_eq!(extremum_of_set(&[], None, ExtremalPrior::None, Extremum::Max), Err(MathError::EmptySet));
    }

    #[test]
    fn underflowing_normalizer_falls_back_to_the_larger_mean() {
        // prior far away from both inputs: evidence underflows
        let prior = ExtremalPrior::Gaussian(n(1e6, 1e-3));
        let out = max_moments_pair(BivariatePair::independent(n(0.0, 1.0), n(2.0, 1.0)), prior).unwrap();
        assert_eq!(out, n(2.0, 1.0));
    }

    #[test]
    fn singleton_set_is_the_input() {
        let out = extremum_of_set(&[n(3.0, 2.0)], None, ExtremalPrior::None, Extremum::Max).unwrap();
        assert_eq!(out, n(3.0, 2.0));
    }

    #[test]
    fn three_iid_standard_normals() {
        let xs = [n(0.0, 1.0); 3];
        let out = extremum_of_set(&xs, None, ExtremalPrior::None, Extremum::Max).unwrap();
        // E[max] = 3 / (2 sqrt(pi)); Var ≈ 0.5595 (exact order-statistic moments)
        assert_abs_diff_eq!(out.mean, 3.0 / (2.0 * PI.sqrt()), epsilon = 0.02);
        assert_abs_diff_eq!(out.variance, 0.5595, epsilon = 0.03);
    }

    #[test]
    fn identity_correlation_matches_the_independent_fold() {
        let xs = [n(0.3, 1.2), n(-0.1, 0.4), n(0.5, 2.0), n(0.0, 0.9)];
        let ind = extremum_of_set(&xs, None, ExtremalPrior::standard_normal(), Extremum::Max).unwrap();
        let cor = extremum_of_set(
            &xs,
            Some(&CorrelationMatrix::identity(4)),
            ExtremalPrior::standard_normal(),
            Extremum::Max,
        )
        .unwrap();
        assert_abs_diff_eq!(ind.mean, cor.mean, epsilon = 1e-14);
        assert_abs_diff_eq!(ind.variance, cor.variance, epsilon = 1e-14);
    }

    #[test]
    fn fully_correlated_copies_behave_like_one_variable() {
        let xs = [n(1.0, 1.0); 3];
        let r = CorrelationMatrix::new(3, vec![1.0; 9]).unwrap();
        let out = extremum_of_set(&xs, Some(&r), ExtremalPrior::None, Extremum::Max).unwrap();
        assert_abs_diff_eq!(out.mean, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(out.variance, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn correlation_matrix_validation() {
        assert!(CorrelationMatrix::new(2, vec![1.0, 0.5, 0.4, 1.0]).is_err());
        assert!(CorrelationMatrix::new(2, vec![1.0, 2.0, 2.0, 1.0]).is_err());
        assert!(CorrelationMatrix::new(2, vec![0.9, 0.0, 0.0, 1.0]).is_err());
        assert!(CorrelationMatrix::new(2, vec![1.0, -1.0, -1.0, 1.0]).is_ok());
    }
}
