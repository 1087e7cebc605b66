use thiserror::Error;

/// Errors raised by the bandit, posterior and theory routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name}: {value} ({reason})")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("sample set is empty")]
    EmptySamples,

    #[error("arm index {index} out of range for {len} arms")]
    ArmIndex { index: usize, len: usize },

    #[error("a bandit instance needs at least 2 arms, got {0}")]
    TooFewArms(usize),

    #[error("arms {first} and {second} tie for the minimum entropic risk")]
    TiedOptimum { first: usize, second: usize },

    #[error("arm {arm} variance {variance} exceeds the variance cap {cap}")]
    VarianceCap { arm: usize, variance: f64, cap: f64 },

    #[error("arm {0} has no observations; posterior sampling needs t_count >= 1")]
    Unvisited(usize),

    #[error("horizon {horizon} is shorter than the number of arms {arms}")]
    HorizonTooShort { horizon: usize, arms: usize },

    #[error("arm {0} is the optimal arm; the quantity is only defined for suboptimal arms")]
    OptimalArm(usize),

    #[error("arm {arm}: h-argument denominator {denominator} is not positive (R constant infeasible)")]
    Infeasible { arm: usize, denominator: f64 },

    #[error("every suboptimal arm has an infeasible R constant")]
    AllInfeasible,

    #[error("n_runs must be at least 1")]
    NoRuns,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Rejects NaN/inf and values that are not strictly positive.
pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::Domain { name, value, reason: "must be finite" });
    }
    if value <= 0.0 {
        return Err(Error::Domain { name, value, reason: "must be > 0" });
    }
    Ok(value)
}

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain { name, value, reason: "must be finite" })
    }
}
