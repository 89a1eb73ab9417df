//! Reference computations that share no numerics with the code they check:
//! Monte-Carlo moments of extrema, exhaustive leaf enumeration, dense
//! Gaussian-process regression and plain negamax.

use nalgebra::{DMatrix, DVector};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use std::collections::HashSet;

use crate::dag::StateKey;
use crate::domains::tictactoe::TttState;
use crate::domains::Domain;
use crate::error::{DomainError, PosteriorError};
use crate::extremal::{CorrelationMatrix, ExtremalPrior, Extremum};
use crate::gaussian::GaussianBelief;
use crate::posterior::{GpConfig, Kernel};

/// Effective sample sizes below this are flagged unreliable.
pub const MIN_EFFECTIVE_SAMPLES: f64 = 100.0;

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub oracle: String,
    pub configuration: String,
    pub mean: f64,
    pub mean_se: f64,
    pub std: f64,
    pub std_se: f64,
    pub samples: usize,
    pub effective_samples: f64,
    pub reliable: bool,
}

/// Samples the extremum of jointly Gaussian variables and weights each
/// sample by the prior density at the extremum (self-normalized importance
/// weighting). Standard errors use the delta method for ratio estimators.
pub fn mc_extremal_moments(
    beliefs: &[GaussianBelief],
    correlations: Option<&CorrelationMatrix>,
    prior: ExtremalPrior,
    kind: Extremum,
    samples: usize,
    rng: &mut dyn RngCore,
) -> OracleReport {
    let d = beliefs.len();
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let r = match correlations {
                Some(m) => m.get(i, j),
                None => (i == j) as u8 as f64,
            };
            cov[(i, j)] = r * (beliefs[i].variance * beliefs[j].variance).sqrt();
        }
    }
    // eigen decomposition tolerates singular (perfectly correlated) inputs
    let eig = cov.symmetric_eigen();
    let factor = &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));

    let mut values = Vec::with_capacity(samples);
    let mut log_w = Vec::with_capacity(samples);
    let mut z = DVector::<f64>::zeros(d);
    for _ in 0..samples {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(rng);
        }
        let x = &factor * &z;
        let ext = (0..d)
            .map(|i| beliefs[i].mean + x[i])
            .fold(None, |acc: Option<f64>, v| match (acc, kind) {
                (None, _) => Some(v),
                (Some(a), Extremum::Max) => Some(a.max(v)),
                (Some(a), Extremum::Min) => Some(a.min(v)),
            })
            .unwrap_or(f64::NAN);
        values.push(ext);
        log_w.push(match prior {
            ExtremalPrior::None => 0.0,
            ExtremalPrior::Gaussian(p) => -0.5 * (ext - p.mean).powi(2) / p.variance,
        });
    }
    let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|l| (l - top).exp()).collect();
    let sw: f64 = w.iter().sum();
    let sw2: f64 = w.iter().map(|x| x * x).sum();
    let mean = w.iter().zip(&values).map(|(w, v)| w * v).sum::<f64>() / sw;
    let dev2: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    let var = w.iter().zip(&dev2).map(|(w, q)| w * q).sum::<f64>() / sw;
    let mean_se = (w.iter().zip(&dev2).map(|(w, q)| w * w * q).sum::<f64>()).sqrt() / sw;
    let var_se = (w.iter().zip(&dev2).map(|(w, q)| w * w * (q - var).powi(2)).sum::<f64>()).sqrt() / sw;
    let std = var.sqrt();
    let effective_samples = sw * sw / sw2;
    OracleReport {
        oracle: "mc_extremal_moments".into(),
        configuration: format!("{kind:?} of {beliefs:?}, prior {prior:?}, correlated: {}", correlations.is_some()),
        mean,
        mean_se,
        std,
        std_se: if std > 0.0 { var_se / (2.0 * std) } else { 0.0 },
        samples,
        effective_samples,
        reliable: effective_samples >= MIN_EFFECTIVE_SAMPLES,
    }
}

#[derive(Debug, Clone)]
pub struct BestLeaf<S> {
    pub state: S,
    pub key: StateKey,
    pub reward: f64,
    /// Distinct terminal states enumerated.
    pub leaves: usize,
}

/// Enumerates every distinct terminal reachable from the root. Refuses once
/// more than `limit` terminals have been seen. Ties keep the smallest key.
pub fn exhaustive_best_leaf<D: Domain>(domain: &D, limit: usize) -> Result<BestLeaf<D::State>, DomainError> {
    let root = domain.root();
    let mut seen: HashSet<StateKey> = HashSet::new();
    seen.insert(domain.key(&root));
    let mut stack = vec![root];
    let mut best: Option<BestLeaf<D::State>> = None;
    let mut leaves = 0;
    while let Some(state) = stack.pop() {
        if domain.is_terminal(&state) {
            leaves += 1;
            if leaves > limit {
                return Err(DomainError::Invalid(format!("more than {limit} terminal states; refusing to enumerate")));
            }
            let reward = domain.reward(&state)?;
            let key = domain.key(&state);
            let better = match &best {
                None => true,
                Some(b) => reward > b.reward || (reward == b.reward && key < b.key),
            };
            if better {
                best = Some(BestLeaf { state, key, reward, leaves: 0 });
            }
            continue;
        }
        for child in domain.successors(&state) {
            if seen.insert(domain.key(&child)) {
                stack.push(child);
            }
        }
    }
    let mut best = best.ok_or_else(|| DomainError::Invalid("domain has no terminal states".into()))?;
    best.leaves = leaves;
    Ok(best)
}

/// Posterior marginals at `queries` from a dense factorization of the full
/// observation Gram matrix. Jitter is raised tenfold on failure up to `1e-2`.
pub fn batch_posterior<S>(
    kernel: &dyn Kernel<S>,
    config: GpConfig,
    observations: &[(S, f64)],
    queries: &[S],
) -> Result<Vec<GaussianBelief>, PosteriorError> {
    let n = observations.len();
    let c = config.scale;
    let resid = DVector::from_iterator(n, observations.iter().map(|(s, r)| r - kernel.prior_mean(s)));
    let mut jitter = config.jitter;
    let chol = loop {
        let k = DMatrix::from_fn(n, n, |i, j| {
            c * kernel.cov(&observations[i].0, &observations[j].0)
                + if i == j { config.noise + c * jitter } else { 0.0 }
        });
        if let Some(ch) = k.cholesky() {
            break ch;
        }
        jitter = if jitter > 0.0 { jitter * 10.0 } else { 1e-6 };
        if jitter > 1e-2 {
            return Err(PosteriorError::Batch(format!("Gram of {n} observations not positive definite")));
        }
    };
    let alpha = chol.solve(&resid);
    Ok(queries
        .iter()
        .map(|q| {
            let k = DVector::from_iterator(n, observations.iter().map(|(s, _)| c * kernel.cov(q, s)));
            let mean = kernel.prior_mean(q) + k.dot(&alpha);
            let v = chol.l().solve_lower_triangular(&k).unwrap_or_else(|| DVector::zeros(n));
            let variance = (c * kernel.cov(q, q) - v.dot(&v)).max(0.0);
            GaussianBelief { mean, variance }
        })
        .collect())
}

/// Game value for the side to move by full recursion (no memoization).
pub fn negamax(state: &TttState) -> i8 {
    if let Some(o) = state.outcome() {
        return if o == 0 { 0 } else { -1 };
    }
    let mut best = i8::MIN;
    for cell in 0..9 {
        if state.cells[cell] == 0 {
            best = best.max(-negamax(&state.play(cell)));
            if best == 1 {
                break;
            }
        }
    }
    best
}
