//! Normal-Gamma posterior per arm.
//!
//! The state `(μ̂, T, α, β)` starts at `(0, 0, ½, ½)`. Each observation moves
//! `μ̂` to the running mean, adds ½ to `α` and adds
//! `T/(T+1)·(x − μ̂)²/2` to `β`, so after `n` observations
//! `α = ½ + n/2` and `β = ½ + ½·Σ(xᵢ − x̄)²`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::gamma::standard_gamma;

pub const PRIOR_ALPHA: f64 = 0.5;
pub const PRIOR_BETA: f64 = 0.5;

/// Posterior parameters of one arm. Immutable; [`PosteriorState::update`]
/// returns a new value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorState {
    mu_hat: f64,
    t_count: u64,
    alpha: f64,
    beta: f64,
}

/// One Thompson draw: a mean `theta` and a precision `kappa > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorSample {
    pub theta: f64,
    pub kappa: f64,
}

impl Default for PosteriorState {
    fn default() -> Self {
        Self::prior()
    }
}

impl PosteriorState {
    pub const fn prior() -> Self {
        Self { mu_hat: 0.0, t_count: 0, alpha: PRIOR_ALPHA, beta: PRIOR_BETA }
    }

    /// State after `count` observations with sample mean `mean` and sum of
    /// squared deviations `sum_sq_dev`.
    pub fn from_summary(mean: f64, count: u64, sum_sq_dev: f64) -> Result<Self> {
        finite("mean", mean)?;
        finite("sum_sq_dev", sum_sq_dev)?;
        if sum_sq_dev < 0.0 {
            return Err(Error::Domain {
                name: "sum_sq_dev",
                value: sum_sq_dev,
                reason: "must be >= 0",
            });
        }
        if count == 0 && (mean != 0.0 || sum_sq_dev != 0.0) {
            return Err(Error::Domain {
                name: "mean",
                value: mean,
                reason: "an empty summary must be the prior",
            });
        }
        Ok(Self {
            mu_hat: mean,
            t_count: count,
            alpha: PRIOR_ALPHA + count as f64 / 2.0,
            beta: PRIOR_BETA + sum_sq_dev / 2.0,
        })
    }

    pub fn mu_hat(&self) -> f64 {
        self.mu_hat
    }

    pub fn t_count(&self) -> u64 {
        self.t_count
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Posterior mean of the precision, `α/β`.
    pub fn precision_mean(&self) -> f64 {
        self.alpha / self.beta
    }

    /// Bayesian update with one observation.
    pub fn update(&self, x: f64) -> Result<Self> {
        finite("observation", x)?;
        let t = self.t_count as f64;
        let keep = t / (t + 1.0);
        let dev = x - self.mu_hat;
        Ok(Self {
            mu_hat: keep * self.mu_hat + x / (t + 1.0),
            t_count: self.t_count + 1,
            alpha: self.alpha + 0.5,
            beta: self.beta + keep * dev * dev / 2.0,
        })
    }

    /// Draws `kappa ~ Gamma(α, β)` (rate β) and then
    /// `theta ~ N(μ̂, 1/T)`, in that order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PosteriorSample> {
        if self.t_count == 0 {
            return Err(Error::Unvisited(0));
        }
        let kappa = standard_gamma(rng, self.alpha) / self.beta;
        let z: f64 = rng.sample(StandardNormal);
        let theta = self.mu_hat + z / (self.t_count as f64).sqrt();
        Ok(PosteriorSample { theta, kappa })
    }
}

/// Sequential update; see [`PosteriorState::update`].
pub fn update(state: &PosteriorState, x: f64) -> Result<PosteriorState> {
    state.update(x)
}

/// Posterior draw; see [`PosteriorState::sample`].
pub fn sample_posterior<R: Rng + ?Sized>(state: &PosteriorState, rng: &mut R) -> Result<PosteriorSample> {
    state.sample(rng)
}

/// Posterior after observing all of `samples` at once, computed in a single
/// Welford pass. Used as an independent check on [`update`].
pub fn batch_posterior(samples: &[f64]) -> Result<PosteriorState> {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (k, &x) in samples.iter().enumerate() {
        finite("observation", x)?;
        let delta = x - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (x - mean);
    }
    PosteriorState::from_summary(mean, samples.len() as u64, m2)
}
