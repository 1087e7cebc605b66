//! Seeded episodes, Monte Carlo aggregation and comparison with the
//! asymptotic regret constant.
//!
//! # Streams
//!
//! Every episode owns one [`Stream`] (ChaCha8) seeded with `seed_from_u64`.
//! Run `k` of a batch with root seed `r` uses the seed
//! [`run_seed`]`(r, k) = splitmix64(r + (k + 1)·0x9E3779B97F4A7C15)`, where
//! `splitmix64` is the SplitMix64 output mix. The map `k ↦ seed` is injective
//! for a fixed root (an odd-multiplier affine map followed by a bijection).
//!
//! Within an episode the stream is consumed round by round: first the
//! policy's draws (arms in index order, κ before θ for ERTS), then one
//! standard normal for the reward of the played arm.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::policies::Policy;
use crate::posterior::PosteriorState;
use crate::risk::BanditInstance;
use crate::theory::TheoryReport;

pub type Stream = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Runs per parallel batch; aggregation is sequential across batches.
const BATCH: usize = 64;

/// Default checkpoint grid; values outside `[K, horizon]` are dropped.
pub const DEFAULT_CHECKPOINTS: [usize; 4] = [100, 1_000, 10_000, 50_000];

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `run` in a batch rooted at `root_seed`.
pub fn run_seed(root_seed: u64, run: u64) -> u64 {
    splitmix64(root_seed.wrapping_add(run.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn stream(seed: u64) -> Stream {
    Stream::seed_from_u64(seed)
}

/// Outcome of one episode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub pulls: Vec<u64>,
    pub choices: Vec<usize>,
    pub regret_trajectory: Vec<f64>,
    pub seed: u64,
}

impl RunResult {
    pub fn horizon(&self) -> usize {
        self.choices.len()
    }

    pub fn final_regret(&self) -> f64 {
        self.regret_trajectory.last().copied().unwrap_or(0.0)
    }
}

/// `Σ_{i ≠ optimal} pulls_i · Δ_i`, summed in arm order.
pub fn pseudo_regret(instance: &BanditInstance, pulls: &[u64]) -> Result<f64> {
    if pulls.len() != instance.num_arms() {
        return Err(Error::ArmIndex { index: pulls.len(), len: instance.num_arms() });
    }
    Ok(regret_of(&instance.gaps(), pulls))
}

fn regret_of(gaps: &[f64], pulls: &[u64]) -> f64 {
    gaps.iter().zip(pulls).map(|(g, &p)| p as f64 * g).sum()
}

/// Plays `policy` for `horizon` rounds. Rounds `1..=K` pull each arm once
/// in order; later rounds ask the policy.
pub fn run_episode(instance: &BanditInstance, policy: Policy, horizon: usize, seed: u64) -> Result<RunResult> {
    policy.validate()?;
    let arms = instance.num_arms();
    if horizon < arms {
        return Err(Error::HorizonTooShort { horizon, arms });
    }
    let gamma = instance.gamma();
    let gaps = instance.gaps();
    let specs = instance.arms();
    let mut rng = stream(seed);

    let mut states = vec![PosteriorState::prior(); arms];
    let mut pulls = vec![0u64; arms];
    let mut choices = Vec::with_capacity(horizon);
    let mut regret_trajectory = Vec::with_capacity(horizon);

    for round in 0..horizon {
        let arm = if round < arms {
            round
        } else {
            policy.choose(&states, gamma, &mut rng)?.arm_index
        };
        let z: f64 = StandardNormal.sample(&mut rng);
        let reward = specs[arm].mean() + specs[arm].std_dev() * z;
        states[arm] = states[arm].update(reward)?;
        pulls[arm] += 1;
        choices.push(arm);
        regret_trajectory.push(regret_of(&gaps, &pulls));
    }

    Ok(RunResult { pulls, choices, regret_trajectory, seed })
}

/// Sample statistics over a batch of episodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateResult {
    pub policy: Policy,
    pub horizon: usize,
    pub n_runs: usize,
    pub mean_regret_trajectory: Vec<f64>,
    /// Sample standard deviation (n − 1 denominator); zero for one run.
    pub std_regret_trajectory: Vec<f64>,
    pub mean_pull_fractions: Vec<f64>,
    pub run_seeds: Vec<u64>,
    pub final_pulls: Vec<Vec<u64>>,
}

impl AggregateResult {
    pub fn mean_regret_at(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.mean_regret_trajectory.get(i)).copied()
    }

    /// `R̂_n / log n`; `None` outside `[2, horizon]`.
    pub fn regret_over_log_n(&self, n: usize) -> Option<f64> {
        if n < 2 {
            return None;
        }
        self.mean_regret_at(n).map(|r| r / (n as f64).ln())
    }
}

/// Runs `n_runs` independent episodes and aggregates them in run-index order.
/// Episodes execute in parallel batches; the aggregate does not depend on
/// scheduling.
pub fn run_many(
    instance: &BanditInstance,
    policy: Policy,
    horizon: usize,
    n_runs: usize,
    root_seed: u64,
) -> Result<AggregateResult> {
    if n_runs == 0 {
        return Err(Error::NoRuns);
    }
    policy.validate()?;
    if horizon < instance.num_arms() {
        return Err(Error::HorizonTooShort { horizon, arms: instance.num_arms() });
    }

    let arms = instance.num_arms();
    let mut mean = vec![0.0; horizon];
    let mut m2 = vec![0.0; horizon];
    let mut pull_totals = vec![0u64; arms];
    let mut run_seeds = Vec::with_capacity(n_runs);
    let mut final_pulls = Vec::with_capacity(n_runs);
    let mut seen = 0usize;

    for start in (0..n_runs).step_by(BATCH) {
        let end = (start + BATCH).min(n_runs);
        let batch = (start..end)
            .into_par_iter()
            .map(|k| run_episode(instance, policy, horizon, run_seed(root_seed, k as u64)))
            .collect::<Result<Vec<_>>>()?;
        for run in batch {
            seen += 1;
            let weight = 1.0 / seen as f64;
            for (t, &x) in run.regret_trajectory.iter().enumerate() {
                let delta = x - mean[t];
                mean[t] += delta * weight;
                m2[t] += delta * (x - mean[t]);
            }
            for (total, p) in pull_totals.iter_mut().zip(&run.pulls) {
                *total += p;
            }
            run_seeds.push(run.seed);
            final_pulls.push(run.pulls);
        }
    }

    let std = if n_runs > 1 {
        m2.iter().map(|v| (v / (n_runs - 1) as f64).max(0.0).sqrt()).collect()
    } else {
        vec![0.0; horizon]
    };
    let total = (horizon * n_runs) as f64;
    let mean_pull_fractions = pull_totals.iter().map(|&p| p as f64 / total).collect();

    Ok(AggregateResult {
        policy,
        horizon,
        n_runs,
        mean_regret_trajectory: mean,
        std_regret_trajectory: std,
        mean_pull_fractions,
        run_seeds,
        final_pulls,
    })
}

/// Checkpoints from the default grid that fall inside `[arms, horizon]`; the
/// horizon alone if none do.
pub fn default_checkpoints(arms: usize, horizon: usize) -> Vec<usize> {
    let grid: Vec<usize> = DEFAULT_CHECKPOINTS
        .iter()
        .copied()
        .filter(|&n| n >= arms && n <= horizon)
        .collect();
    if grid.is_empty() {
        vec![horizon]
    } else {
        grid
    }
}

/// One row of the regret-versus-theory table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub n: usize,
    pub mean_regret: f64,
    pub std_regret: f64,
    pub regret_over_log_n: f64,
    pub theory_upper: Option<f64>,
    pub theory_lower: Option<f64>,
}

/// `R̂_n / log n` at each checkpoint next to the asymptotic constants.
/// Without a theory report (every arm infeasible) the theory columns are
/// empty.
pub fn regret_vs_theory(
    aggregate: &AggregateResult,
    theory: Option<&TheoryReport>,
    checkpoints: &[usize],
) -> Result<Vec<ComparisonRow>> {
    let arms = aggregate.mean_pull_fractions.len();
    checkpoints
        .iter()
        .map(|&n| {
            if n < arms.max(2) || n > aggregate.horizon {
                return Err(Error::Domain {
                    name: "checkpoint",
                    value: n as f64,
                    reason: "must lie in [K, horizon]",
                });
            }
            let mean_regret = aggregate.mean_regret_trajectory[n - 1];
            Ok(ComparisonRow {
                n,
                mean_regret,
                std_regret: aggregate.std_regret_trajectory[n - 1],
                regret_over_log_n: mean_regret / (n as f64).ln(),
                theory_upper: theory.map(|t| t.upper_bound),
                theory_lower: theory.and_then(|t| t.lower_bound),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> BanditInstance {
        BanditInstance::from_pairs(&[(1.0, 1.0), (0.0, 1.0)], 1.0, 2.0).unwrap()
    }

    #[test]
    fn run_seed_is_injective_on_a_range() {
        let mut seeds: Vec<u64> = (0..10_000).map(|k| run_seed(42, k)).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 10_000);
        assert_ne!(run_seed(1, 0), run_seed(2, 0));
    }

    #[test]
    fn pseudo_regret_examples() {
        let inst = reference();
        assert_eq!(pseudo_regret(&inst, &[50, 0]).unwrap(), 0.0);
        assert_eq!(pseudo_regret(&inst, &[3, 7]).unwrap(), 7.0);
        assert!(pseudo_regret(&inst, &[1, 2, 3]).is_err());
    }

    #[test]
    fn horizon_equal_to_arms_pulls_each_once() {
        let inst = BanditInstance::from_pairs(&[(1.0, 1.0), (0.0, 1.0), (0.5, 0.5)], 1.0, 2.0).unwrap();
        for policy in [Policy::Erts, Policy::Uniform, Policy::FtlEr] {
            let run = run_episode(&inst, policy, 3, 9).unwrap();
            assert_eq!(run.pulls, vec![1, 1, 1]);
            assert_eq!(run.choices, vec![0, 1, 2]);
        }
    }

    #[test]
    fn horizon_shorter_than_arms_is_rejected() {
        assert_eq!(
            run_episode(&reference(), Policy::Erts, 1, 0),
            Err(Error::HorizonTooShort { horizon: 1, arms: 2 })
        );
    }

    #[test]
    fn episode_invariants() {
        let inst = BanditInstance::from_pairs(&[(0.2, 1.5), (0.0, 0.2), (0.4, 1.9)], 0.8, 2.0).unwrap();
        let gaps = inst.gaps();
        for policy in [Policy::Erts, Policy::Uniform, Policy::EpsilonGreedyEr { epsilon: 0.2 }, Policy::FtlEr] {
            let run = run_episode(&inst, policy, 2_000, 5).unwrap();
            assert_eq!(run.pulls.iter().sum::<u64>(), 2_000);
            let mut prev = 0.0;
            for (t, (&r, &arm)) in run.regret_trajectory.iter().zip(&run.choices).enumerate() {
                assert!(r >= prev);
                assert!((r - prev - gaps[arm]).abs() < 1e-9, "round {t}");
                prev = r;
            }
            assert_eq!(run.final_regret(), pseudo_regret(&inst, &run.pulls).unwrap());
        }
    }

    #[test]
    fn episode_is_reproducible() {
        let a = run_episode(&reference(), Policy::Erts, 3_000, 77).unwrap();
        let b = run_episode(&reference(), Policy::Erts, 3_000, 77).unwrap();
        assert_eq!(a, b);
        let c = run_episode(&reference(), Policy::Erts, 3_000, 78).unwrap();
        assert_ne!(a.choices, c.choices);
    }

    #[test]
    fn single_run_aggregate_equals_the_run() {
        let agg = run_many(&reference(), Policy::Erts, 500, 1, 3).unwrap();
        let run = run_episode(&reference(), Policy::Erts, 500, run_seed(3, 0)).unwrap();
        assert_eq!(agg.mean_regret_trajectory, run.regret_trajectory);
        assert!(agg.std_regret_trajectory.iter().all(|&s| s == 0.0));
        assert_eq!(agg.final_pulls, vec![run.pulls.clone()]);
        let fractions: Vec<f64> = run.pulls.iter().map(|&p| p as f64 / 500.0).collect();
        assert_eq!(agg.mean_pull_fractions, fractions);
    }

    #[test]
    fn doubling_runs_keeps_the_first_half() {
        let small = run_many(&reference(), Policy::Erts, 300, 70, 11).unwrap();
        let large = run_many(&reference(), Policy::Erts, 300, 140, 11).unwrap();
        assert_eq!(small.run_seeds[..], large.run_seeds[..70]);
        assert_eq!(small.final_pulls[..], large.final_pulls[..70]);
    }

    #[test]
    fn aggregate_fractions_sum_to_one() {
        let agg = run_many(&reference(), Policy::EpsilonGreedyEr { epsilon: 0.1 }, 400, 9, 1).unwrap();
        assert!((agg.mean_pull_fractions.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert_eq!(agg.n_runs, 9);
    }

    #[test]
    fn run_many_rejects_zero_runs() {
        assert_eq!(run_many(&reference(), Policy::Erts, 10, 0, 0), Err(Error::NoRuns));
    }

    #[test]
    fn aggregate_independent_of_thread_count() {
        let inst = reference();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let serial = pool.install(|| run_many(&inst, Policy::Erts, 400, 80, 5).unwrap());
        let parallel = run_many(&inst, Policy::Erts, 400, 80, 5).unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn default_checkpoint_grid() {
        assert_eq!(default_checkpoints(2, 50_000), vec![100, 1_000, 10_000, 50_000]);
        assert_eq!(default_checkpoints(2, 5_000), vec![100, 1_000]);
        assert_eq!(default_checkpoints(2, 50), vec![50]);
    }
}
