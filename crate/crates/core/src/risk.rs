//! Entropic risk of Gaussian arms, risk gaps and the Gaussian KL divergence.
//!
//! Rewards are treated as gains: `ER_γ(X) = (1/γ)·log E[exp(−γX)]`, which for
//! `X ~ N(μ, σ²)` is `−μ + (γ/2)σ²`. Lower entropic risk is better, so the
//! optimal arm is the one with the smallest value.

use serde::{Deserialize, Serialize};

use crate::error::{finite, positive, Error, Result};

/// True parameters of one Gaussian arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawArm", into = "RawArm")]
pub struct ArmSpec {
    mean: f64,
    variance: f64,
}

#[derive(Serialize, Deserialize)]
struct RawArm {
    mean: f64,
    variance: f64,
}

impl TryFrom<RawArm> for ArmSpec {
    type Error = Error;

    fn try_from(raw: RawArm) -> Result<Self> {
        ArmSpec::new(raw.mean, raw.variance)
    }
}

impl From<ArmSpec> for RawArm {
    fn from(arm: ArmSpec) -> Self {
        RawArm { mean: arm.mean, variance: arm.variance }
    }
}

impl ArmSpec {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        Ok(Self {
            mean: finite("mean", mean)?,
            variance: positive("variance", variance)?,
        })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Closed-form entropic risk of this arm at risk level `gamma`.
    pub fn entropic_risk(&self, gamma: f64) -> Result<f64> {
        er_gaussian(self.mean, self.variance, gamma)
    }
}

/// A K-armed Gaussian bandit with risk parameter `gamma` and variance cap.
///
/// Construction guarantees K ≥ 2, `gamma > 0`, `sigma_max_sq > 1`, every arm
/// variance within the cap, and a unique arm of minimum entropic risk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct BanditInstance {
    arms: Vec<ArmSpec>,
    gamma: f64,
    sigma_max_sq: f64,
    risks: Vec<f64>,
    optimal: usize,
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    arms: Vec<ArmSpec>,
    gamma: f64,
    sigma_max_sq: f64,
}

impl TryFrom<RawInstance> for BanditInstance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        BanditInstance::new(raw.arms, raw.gamma, raw.sigma_max_sq)
    }
}

impl From<BanditInstance> for RawInstance {
    fn from(instance: BanditInstance) -> Self {
        RawInstance {
            arms: instance.arms,
            gamma: instance.gamma,
            sigma_max_sq: instance.sigma_max_sq,
        }
    }
}

impl BanditInstance {
    pub fn new(arms: Vec<ArmSpec>, gamma: f64, sigma_max_sq: f64) -> Result<Self> {
        if arms.len() < 2 {
            return Err(Error::TooFewArms(arms.len()));
        }
        positive("gamma", gamma)?;
        finite("sigma_max_sq", sigma_max_sq)?;
        if sigma_max_sq <= 1.0 {
            return Err(Error::Domain {
                name: "sigma_max_sq",
                value: sigma_max_sq,
                reason: "must be > 1",
            });
        }
        for (arm, spec) in arms.iter().enumerate() {
            if spec.variance > sigma_max_sq {
                return Err(Error::VarianceCap {
                    arm,
                    variance: spec.variance,
                    cap: sigma_max_sq,
                });
            }
        }

        let risks = arms
            .iter()
            .map(|a| a.entropic_risk(gamma))
            .collect::<Result<Vec<_>>>()?;
        let optimal = argmin(&risks);
        if let Some(second) = (0..risks.len()).find(|&i| i != optimal && risks[i] == risks[optimal]) {
            return Err(Error::TiedOptimum {
                first: optimal.min(second),
                second: optimal.max(second),
            });
        }

        Ok(Self { arms, gamma, sigma_max_sq, risks, optimal })
    }

    /// Convenience constructor from `(mean, variance)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)], gamma: f64, sigma_max_sq: f64) -> Result<Self> {
        let arms = pairs
            .iter()
            .map(|&(m, v)| ArmSpec::new(m, v))
            .collect::<Result<Vec<_>>>()?;
        Self::new(arms, gamma, sigma_max_sq)
    }

    pub fn arms(&self) -> &[ArmSpec] {
        &self.arms
    }

    pub fn arm(&self, index: usize) -> Result<&ArmSpec> {
        self.arms.get(index).ok_or(Error::ArmIndex { index, len: self.arms.len() })
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn sigma_max_sq(&self) -> f64 {
        self.sigma_max_sq
    }

    /// Index of the unique arm with minimum entropic risk.
    pub fn optimal_arm(&self) -> usize {
        self.optimal
    }

    pub fn entropic_risk(&self, index: usize) -> Result<f64> {
        self.risks.get(index).copied().ok_or(Error::ArmIndex { index, len: self.arms.len() })
    }

    pub fn entropic_risks(&self) -> &[f64] {
        &self.risks
    }

    /// Gap `ER(arm) − ER(optimal)`; zero for the optimal arm.
    pub fn gap(&self, index: usize) -> Result<f64> {
        Ok(self.entropic_risk(index)? - self.risks[self.optimal])
    }

    /// All gaps, in arm order.
    pub fn gaps(&self) -> Vec<f64> {
        let best = self.risks[self.optimal];
        self.risks.iter().map(|r| r - best).collect()
    }

    pub fn suboptimal_arms(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.arms.len()).filter(move |&i| i != self.optimal)
    }
}

/// `−mean + (gamma/2)·variance`.
pub fn er_gaussian(mean: f64, variance: f64, gamma: f64) -> Result<f64> {
    finite("mean", mean)?;
    positive("variance", variance)?;
    positive("gamma", gamma)?;
    Ok(-mean + 0.5 * gamma * variance)
}

/// Sample entropic risk `(1/γ)·log(mean(exp(−γx)))`.
///
/// The exponentials are shifted by `max(−γx)` before summing, so every term
/// lies in `(0, 1]` and the sum cannot overflow.
pub fn er_empirical(samples: &[f64], gamma: f64) -> Result<f64> {
    positive("gamma", gamma)?;
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut shift = f64::NEG_INFINITY;
    for &x in samples {
        finite("sample", x)?;
        shift = shift.max(-gamma * x);
    }
    let sum: f64 = samples.iter().map(|&x| (-gamma * x - shift).exp()).sum();
    let log_mean = sum.ln() - (samples.len() as f64).ln() + shift;
    Ok(log_mean / gamma)
}

/// `ER_γ(arm) − min_k ER_γ(k)`.
pub fn er_gap(instance: &BanditInstance, arm_index: usize) -> Result<f64> {
    instance.gap(arm_index)
}

/// `KL(a ‖ b) = log(σ_b/σ_a) + (σ_a² + (μ_a − μ_b)²)/(2σ_b²) − 1/2`.
pub fn kl_gaussian(a: &ArmSpec, b: &ArmSpec) -> f64 {
    let diff = a.mean - b.mean;
    0.5 * (b.variance / a.variance).ln() + (a.variance + diff * diff) / (2.0 * b.variance) - 0.5
}

/// Position of the smallest value; ties go to the lowest index.
pub(crate) fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}
