//! Joint Gaussian prior over generative scores and exact conditioning on
//! rollout rewards.
//!
//! The prior is `g ~ N(mu, c * Sigma)` with `Sigma` given by a [`Kernel`]; a
//! reward `r` at leaf `t` is `N(r; g_t, lambda)`. The posterior keeps the
//! lower Cholesky factor `L` of `K = c * Sigma_OO + (lambda + c * jitter) I`
//! over the observation log together with the whitened residual
//! `beta = L^-1 (r - mu_O)`. Appending an observation adds one row to `L` and
//! one entry to `beta` in `O(n^2)`; earlier entries never change.
//!
//! States registered with [`PosteriorState::track`] additionally cache
//! `v = L^-1 k_O`, which also only grows by one entry per observation, so
//! their marginals are maintained in `O(n)` per observation:
//! `mean = mu + v . beta`, `var = c Sigma_ii - |v|^2`.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::dag::StateKey;
use crate::error::PosteriorError;
use crate::gaussian::GaussianBelief;

/// State-similarity function defining the prior over generative scores.
pub trait Kernel<S>: Send + Sync {
    fn cov(&self, a: &S, b: &S) -> f64;

    fn prior_mean(&self, _state: &S) -> f64 {
        0.0
    }

    /// Prior variance gained per level of depth (the kernel's own Brownian
    /// step size before the global scale).
    fn level_increment(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpConfig {
    /// Scale `c` of the prior covariance.
    pub scale: f64,
    /// Observation noise `lambda`.
    pub noise: f64,
    /// Added to the kernel diagonal of observed leaves (before scaling).
    pub jitter: f64,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self { scale: 1.0, noise: 1e-4, jitter: 1e-6 }
    }
}

#[derive(Debug, Clone)]
pub struct Observation<S> {
    pub key: StateKey,
    pub state: S,
    pub reward: f64,
}

#[derive(Debug, Clone)]
struct Tracked<S> {
    state: S,
    prior_var: f64,
    proj: Vec<f64>,
    mean: f64,
    var: f64,
    refs: usize,
}

#[derive(Debug, Clone)]
pub struct PosteriorState<S> {
    config: GpConfig,
    log: Vec<Observation<S>>,
    // row i holds L[i][0..=i]
    chol: Vec<Vec<f64>>,
    whitened: Vec<f64>,
    tracked: HashMap<StateKey, Tracked<S>>,
}

impl<S: Clone> PosteriorState<S> {
    pub fn new(config: GpConfig) -> Result<Self, PosteriorError> {
        if !(config.noise > 0.0) || !config.noise.is_finite() {
            return Err(PosteriorError::NonPositiveNoise(config.noise));
        }
        Ok(Self {
            config,
            log: Vec::new(),
            chol: Vec::new(),
            whitened: Vec::new(),
            tracked: HashMap::new(),
        })
    }

    pub fn config(&self) -> GpConfig {
        self.config
    }

    pub fn len(&self) -> usize {
        self.log.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log.is_empty()
    }

    pub fn observations(&self) -> &[Observation<S>] {
        &self.log
    }

    /// The Cholesky factor as dense rows (for inspection and tests).
    pub fn factor(&self) -> &[Vec<f64>] {
        &self.chol
    }

    fn forward_solve(&self, rhs: &mut [f64]) {
        for i in 0..rhs.len() {
            let row = &self.chol[i];
            let s: f64 = row[..i].iter().zip(&rhs[..i]).map(|(l, x)| l * x).sum();
            rhs[i] = (rhs[i] - s) / row[i];
        }
    }

    fn cross_cov(&self, kernel: &dyn Kernel<S>, state: &S) -> Vec<f64> {
        self.log.iter().map(|o| self.config.scale * kernel.cov(state, &o.state)).collect()
    }

    /// Appends one observation, extending the factorization by one row.
    pub fn add_observation(
        &mut self,
        kernel: &dyn Kernel<S>,
        key: StateKey,
        state: S,
        reward: f64,
    ) -> Result<(), PosteriorError> {
        let c = self.config.scale;
        let mut l = self.cross_cov(kernel, &state);
        let diag = c * kernel.cov(&state, &state) + self.config.noise + c * self.config.jitter;
        let partner = l
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(j, _)| j);
        self.forward_solve(&mut l);
        let residual = diag - l.iter().map(|x| x * x).sum::<f64>();
        if !(residual > f64::EPSILON * diag.abs()) {
            return Err(PosteriorError::Breakdown {
                leaf: key.to_hex(),
                partner: partner.map_or_else(|| "-".to_string(), |j| self.log[j].key.to_hex()),
                residual,
            });
        }
        let d = residual.sqrt();
        let innovation = reward - kernel.prior_mean(&state) - dot(&l, &self.whitened);
        let w = innovation / d;

        for t in self.tracked.values_mut() {
            let e = (c * kernel.cov(&t.state, &state) - dot(&l, &t.proj)) / d;
            t.proj.push(e);
            t.mean += e * w;
            t.var -= e * e;
        }

        l.push(d);
        self.chol.push(l);
        self.whitened.push(w);
        self.log.push(Observation { key, state, reward });
        Ok(())
    }

    /// Posterior marginal of any state, in `O(n^2)`.
    pub fn marginal(&self, kernel: &dyn Kernel<S>, state: &S) -> GaussianBelief {
        let mut v = self.cross_cov(kernel, state);
        self.forward_solve(&mut v);
        let mean = kernel.prior_mean(state) + dot(&v, &self.whitened);
        let var = self.config.scale * kernel.cov(state, state) - dot(&v, &v);
        GaussianBelief { mean, variance: var.max(0.0) }
    }

    /// Starts maintaining the marginal of `state` incrementally. Calls are
    /// reference counted per key.
    pub fn track(&mut self, kernel: &dyn Kernel<S>, key: &StateKey, state: &S) {
        if let Some(t) = self.tracked.get_mut(key) {
            t.refs += 1;
            return;
        }
        let mut proj = self.cross_cov(kernel, state);
        self.forward_solve(&mut proj);
        let prior_var = self.config.scale * kernel.cov(state, state);
        let mean = kernel.prior_mean(state) + dot(&proj, &self.whitened);
        let var = prior_var - dot(&proj, &proj);
        self.tracked.insert(
            key.clone(),
            Tracked { state: state.clone(), prior_var, proj, mean, var, refs: 1 },
        );
    }

    pub fn untrack(&mut self, key: &StateKey) {
        if let Some(t) = self.tracked.get_mut(key) {
            t.refs -= 1;
            if t.refs == 0 {
                self.tracked.remove(key);
            }
        }
    }

    pub fn is_tracked(&self, key: &StateKey) -> bool {
        self.tracked.contains_key(key)
    }

    pub fn tracked_count(&self) -> usize {
        self.tracked.len()
    }

    /// Cached marginal of a tracked state, variance floored at zero.
    pub fn tracked_marginal(&self, key: &StateKey) -> Option<GaussianBelief> {
        self.tracked.get(key).map(|t| GaussianBelief { mean: t.mean, variance: t.var.max(0.0) })
    }

    /// Prior variance of a tracked state.
    pub fn tracked_prior_variance(&self, key: &StateKey) -> Option<f64> {
        self.tracked.get(key).map(|t| t.prior_var)
    }

    /// `alpha = K^-1 (r - mu_O)`.
    pub fn alpha(&self) -> Vec<f64> {
        let n = self.whitened.len();
        let mut x = self.whitened.clone();
        for i in (0..n).rev() {
            let s: f64 = ((i + 1)..n).map(|j| self.chol[j][i] * x[j]).sum();
            x[i] = (x[i] - s) / self.chol[i][i];
        }
        x
    }

    /// Recomputes the factorization from the log with a dense Cholesky
    /// decomposition (and re-derives every tracked marginal).
    pub fn rebuilt(&self, kernel: &dyn Kernel<S>, config: GpConfig) -> Result<Self, PosteriorError> {
        let mut fresh = Self::new(config)?;
        let n = self.log.len();
        let c = config.scale;
        let mut chol: Vec<Vec<f64>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = vec![0.0; i + 1];
            for j in 0..=i {
                let mut k = c * kernel.cov(&self.log[i].state, &self.log[j].state);
                if i == j {
                    k += config.noise + c * config.jitter;
                }
                let s: f64 = if i == j {
                    row[..j].iter().map(|x| x * x).sum()
                } else {
                    (0..j).map(|m| row[m] * chol[j][m]).sum()
                };
                if i == j {
                    let residual = k - s;
                    if !(residual > f64::EPSILON * k.abs()) {
                        return Err(PosteriorError::Breakdown {
                            leaf: self.log[i].key.to_hex(),
                            partner: "-".into(),
                            residual,
                        });
                    }
                    row[j] = residual.sqrt();
                } else {
                    row[j] = (k - s) / chol[j][j];
                }
            }
            chol.push(row);
        }
        fresh.chol = chol;
        let mut resid: Vec<f64> = self.log.iter().map(|o| o.reward - kernel.prior_mean(&o.state)).collect();
        fresh.forward_solve(&mut resid);
        fresh.whitened = resid;
        fresh.log = self.log.clone();
        for (key, t) in &self.tracked {
            fresh.track(kernel, key, &t.state);
            if let Some(f) = fresh.tracked.get_mut(key) {
                f.refs = t.refs;
            }
        }
        Ok(fresh)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Affine reward standardization estimated from pilot rollouts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub shift: f64,
    pub scale: f64,
    /// Whether the spread was too small and the scale was floored.
    pub floored: bool,
}

impl Standardizer {
    pub const IDENTITY: Standardizer = Standardizer { shift: 0.0, scale: 1.0, floored: false };
    pub const SCALE_FLOOR: f64 = 1e-6;

    pub fn apply(&self, reward: f64) -> f64 {
        (reward - self.shift) / self.scale
    }
}

/// Sample mean and (n - 1)-normalized standard deviation of the pilot rewards.
pub fn standardize_from_pilot(rewards: &[f64]) -> Result<Standardizer, PosteriorError> {
    if rewards.len() < 2 {
        return Err(PosteriorError::TooFewPilotRewards(rewards.len()));
    }
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let var = rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    if sd < Standardizer::SCALE_FLOOR {
        log::warn!("pilot rewards have no spread (sd = {sd:e}); flooring the scale at {:e}", Standardizer::SCALE_FLOOR);
        return Ok(Standardizer { shift: mean, scale: Standardizer::SCALE_FLOOR, floored: true });
    }
    Ok(Standardizer { shift: mean, scale: sd, floored: false })
}
