//! Arm-selection rules: entropic-risk Thompson sampling (ERTS) and the
//! comparison baselines.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::posterior::PosteriorState;
use crate::risk::{argmin, BanditInstance};
use crate::simulator::{run_episode, RunResult};

/// The chosen arm together with the per-arm scores it minimised.
///
/// For ERTS and the greedy baselines `diagnostic` holds the sampled or
/// plug-in entropic risk of every arm. Random picks (uniform, or an
/// exploration step) report an indicator: 0 for the chosen arm, 1 elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyDecision {
    pub arm_index: usize,
    pub diagnostic: Vec<f64>,
}

impl PolicyDecision {
    fn from_scores(diagnostic: Vec<f64>) -> Self {
        Self { arm_index: argmin(&diagnostic), diagnostic }
    }

    fn random(arm_index: usize, arms: usize) -> Self {
        let diagnostic = (0..arms).map(|i| if i == arm_index { 0.0 } else { 1.0 }).collect();
        Self { arm_index, diagnostic }
    }
}

/// Baseline families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineKind {
    Uniform,
    EpsilonGreedyEr { epsilon: f64 },
    FtlEr,
}

/// Every policy the simulator can run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Policy {
    Erts,
    Uniform,
    EpsilonGreedyEr { epsilon: f64 },
    FtlEr,
}

impl Policy {
    pub fn validate(&self) -> Result<()> {
        if let Policy::EpsilonGreedyEr { epsilon } = *self {
            check_epsilon(epsilon)?;
        }
        Ok(())
    }

    /// Short label used in CSV rows and plot-data headers.
    pub fn label(&self) -> String {
        match self {
            Policy::Erts => "erts".to_string(),
            Policy::Uniform => "uniform".to_string(),
            Policy::EpsilonGreedyEr { epsilon } => format!("epsilon_greedy_er({epsilon})"),
            Policy::FtlEr => "ftl_er".to_string(),
        }
    }

    pub fn choose<R: Rng + ?Sized>(
        &self,
        states: &[PosteriorState],
        gamma: f64,
        rng: &mut R,
    ) -> Result<PolicyDecision> {
        match *self {
            Policy::Erts => erts_choose(states, gamma, rng),
            Policy::Uniform => baseline_choose(BaselineKind::Uniform, states, gamma, rng),
            Policy::EpsilonGreedyEr { epsilon } => {
                baseline_choose(BaselineKind::EpsilonGreedyEr { epsilon }, states, gamma, rng)
            }
            Policy::FtlEr => baseline_choose(BaselineKind::FtlEr, states, gamma, rng),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn check_epsilon(epsilon: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&epsilon) {
        Ok(epsilon)
    } else {
        Err(Error::Domain { name: "epsilon", value: epsilon, reason: "must lie in [0, 1]" })
    }
}

fn require_visited(states: &[PosteriorState]) -> Result<()> {
    match states.iter().position(|s| s.t_count() == 0) {
        Some(arm) => Err(Error::Unvisited(arm)),
        None => Ok(()),
    }
}

/// One ERTS round: for each arm in index order draw `(κ, θ)` from its
/// posterior and score it `−θ + γ/(2κ)`; play the lowest score.
pub fn erts_choose<R: Rng + ?Sized>(
    states: &[PosteriorState],
    gamma: f64,
    rng: &mut R,
) -> Result<PolicyDecision> {
    crate::error::positive("gamma", gamma)?;
    require_visited(states)?;
    if states.is_empty() {
        return Err(Error::TooFewArms(0));
    }
    let mut scores = Vec::with_capacity(states.len());
    for state in states {
        let draw = state.sample(rng)?;
        scores.push(-draw.theta + gamma / (2.0 * draw.kappa));
    }
    Ok(PolicyDecision::from_scores(scores))
}

/// Plug-in entropic risk `−μ̂ + γ/(2·α/β)`.
pub fn plug_in_er(state: &PosteriorState, gamma: f64) -> f64 {
    -state.mu_hat() + gamma / (2.0 * state.precision_mean())
}

pub fn baseline_choose<R: Rng + ?Sized>(
    kind: BaselineKind,
    states: &[PosteriorState],
    gamma: f64,
    rng: &mut R,
) -> Result<PolicyDecision> {
    let arms = states.len();
    if arms == 0 {
        return Err(Error::TooFewArms(0));
    }
    let epsilon = match kind {
        BaselineKind::Uniform => 1.0,
        BaselineKind::EpsilonGreedyEr { epsilon } => check_epsilon(epsilon)?,
        BaselineKind::FtlEr => 0.0,
    };
    // ε = 1 and ε = 0 consume no coin flip, so ε = 1 replays uniform exactly.
    let explore = epsilon >= 1.0 || (epsilon > 0.0 && rng.random::<f64>() < epsilon);
    if explore {
        return Ok(PolicyDecision::random(rng.random_range(0..arms), arms));
    }
    crate::error::positive("gamma", gamma)?;
    require_visited(states)?;
    Ok(PolicyDecision::from_scores(states.iter().map(|s| plug_in_er(s, gamma)).collect()))
}

/// Full ERTS run: each arm once, then Thompson rounds up to `horizon`.
pub fn erts_episode(instance: &BanditInstance, horizon: usize, seed: u64) -> Result<RunResult> {
    run_episode(instance, Policy::Erts, horizon, seed)
}
