//! Regret-bound constants for entropic-risk Thompson sampling.
//!
//! For a suboptimal arm `i` with gap `Δ` and variance `σ²`, and a weight
//! `ξ ∈ (0, 1)`,
//!
//! ```text
//! R_i = max{ 2 / (ξ²Δ²),  1 / h(γσ² / (γσ² − 2(1 − ξ)Δ)) },   h(x) = ½(x − 1 − log x)
//! ```
//!
//! and the asymptotic regret constant is `Σ_i R_i·Δ_i`, matching from above
//! (ERTS) and below (any consistent policy). The explicit weight
//!
//! ```text
//! ξ_γ = 1 − (γσ²/(2Δ))·(1 − 1/h₊⁻¹(Δ²/2))
//! ```
//!
//! makes the second term collapse to `2/Δ²`.
//!
//! The second term is only defined when `γσ² − 2(1 − ξ)Δ > 0`; otherwise
//! the arm is reported as infeasible rather than clamped.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::checked_gamma_ur;

use crate::error::{finite, positive, Error, Result};
use crate::risk::{kl_gaussian, ArmSpec, BanditInstance};

/// `h(x) = ½(x − 1 − log x)` for `x > 0`.
pub fn h(x: f64) -> Result<f64> {
    positive("x", x)?;
    Ok(h_unchecked(x))
}

fn h_unchecked(x: f64) -> f64 {
    // log1p keeps precision next to the minimum at x = 1.
    if x > 0.5 && x < 2.0 {
        let d = x - 1.0;
        0.5 * (d - d.ln_1p())
    } else {
        0.5 * (x - 1.0 - x.ln())
    }
}

fn check_level(y: f64) -> Result<f64> {
    finite("y", y)?;
    if y < 0.0 {
        return Err(Error::Domain { name: "y", value: y, reason: "must be >= 0" });
    }
    Ok(y)
}

/// Largest root of `h(x) = y`, in `[1, ∞)`.
pub fn h_inv_plus(y: f64) -> Result<f64> {
    check_level(y)?;
    if y == 0.0 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (1.0, 2.0);
    while h_unchecked(hi) < y {
        lo = hi;
        hi *= 2.0;
    }
    Ok(bisect(lo, hi, y, true))
}

/// Smallest root of `h(x) = y`, in `(0, 1]`.
pub fn h_inv_minus(y: f64) -> Result<f64> {
    check_level(y)?;
    if y == 0.0 {
        return Ok(1.0);
    }
    if y > h_unchecked(f64::MIN_POSITIVE) {
        return Err(Error::Domain {
            name: "y",
            value: y,
            reason: "root of the lower branch underflows f64",
        });
    }
    let (mut lo, mut hi) = (0.5, 1.0);
    while h_unchecked(lo) < y {
        hi = lo;
        lo *= 0.5;
    }
    Ok(bisect(lo, hi, y, false))
}

/// Bisection on a monotone branch of `h`, run until the bracket cannot be
/// split further in f64. `increasing` selects the branch direction.
fn bisect(mut lo: f64, mut hi: f64, y: f64, increasing: bool) -> f64 {
    for _ in 0..4096 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let below = h_unchecked(mid) < y;
        if below == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (h_unchecked(lo) - y).abs() <= (h_unchecked(hi) - y).abs() {
        lo
    } else {
        hi
    }
}

/// How the weight ξ is chosen per arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum XiPolicy {
    /// The same ξ for every arm.
    Fixed { xi: f64 },
    /// Each arm's own ξ_γ, or `fallback` when ξ_γ is outside (0, 1).
    XiGamma { fallback: f64 },
}

impl Default for XiPolicy {
    fn default() -> Self {
        XiPolicy::XiGamma { fallback: 0.9 }
    }
}

impl XiPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            XiPolicy::Fixed { xi } => check_xi("xi", xi).map(drop),
            XiPolicy::XiGamma { fallback } => check_xi("fallback", fallback).map(drop),
        }
    }
}

fn check_xi(name: &'static str, xi: f64) -> Result<f64> {
    if xi > 0.0 && xi < 1.0 {
        Ok(xi)
    } else {
        Err(Error::Domain { name, value: xi, reason: "must lie in (0, 1)" })
    }
}

/// `R_i` for one arm, or the reason it does not exist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RConstant {
    Feasible {
        value: f64,
        mean_term: f64,
        precision_term: f64,
    },
    /// `γσ² − 2(1 − ξ)Δ ≤ 0`, so the h-argument is outside `(1, ∞)`.
    Infeasible { mean_term: f64, denominator: f64 },
}

impl RConstant {
    pub fn value(&self) -> Option<f64> {
        match *self {
            RConstant::Feasible { value, .. } => Some(value),
            RConstant::Infeasible { .. } => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, RConstant::Feasible { .. })
    }
}

fn suboptimal_arm(instance: &BanditInstance, arm_index: usize) -> Result<(&ArmSpec, f64)> {
    let arm = instance.arm(arm_index)?;
    if arm_index == instance.optimal_arm() {
        return Err(Error::OptimalArm(arm_index));
    }
    Ok((arm, instance.gap(arm_index)?))
}

/// `R_i = max{2/(ξ²Δ²), 1/h(γσ²/(γσ² − 2(1−ξ)Δ))}`.
pub fn r_constant(instance: &BanditInstance, arm_index: usize, xi: f64) -> Result<RConstant> {
    check_xi("xi", xi)?;
    let (arm, gap) = suboptimal_arm(instance, arm_index)?;
    Ok(r_from_parts(instance.gamma(), arm.variance(), gap, xi))
}

fn r_from_parts(gamma: f64, variance: f64, gap: f64, xi: f64) -> RConstant {
    let mean_term = 2.0 / (xi * xi * gap * gap);
    let scaled = gamma * variance;
    let denominator = scaled - 2.0 * (1.0 - xi) * gap;
    if denominator <= 0.0 {
        return RConstant::Infeasible { mean_term, denominator };
    }
    let precision_term = 1.0 / h_unchecked(scaled / denominator);
    if !precision_term.is_finite() {
        // (1 − ξ)Δ vanished against γσ²; the argument rounded to exactly 1.
        return RConstant::Infeasible { mean_term, denominator };
    }
    RConstant::Feasible {
        value: mean_term.max(precision_term),
        mean_term,
        precision_term,
    }
}

/// The explicit weight ξ_γ for one arm, with the checks that go with it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XiGamma {
    pub value: f64,
    /// Whether `value ∈ (0, 1)`.
    pub in_unit_interval: bool,
    /// `h₊⁻¹(Δ²/2)`.
    pub h_inverse: f64,
    /// `γσ²/(γσ² − 2(1 − ξ_γ)Δ)` evaluated with the computed ξ_γ.
    pub h_argument: f64,
    /// `h(h_argument)`; equals `Δ²/2` up to rounding.
    pub h_value: f64,
    /// `1/h(h_argument) ≤ 2/(ξ_γ²Δ²)`; only evaluated when ξ_γ ∈ (0, 1).
    pub inequality_holds: Option<bool>,
}

pub fn xi_gamma(instance: &BanditInstance, arm_index: usize) -> Result<XiGamma> {
    let (arm, gap) = suboptimal_arm(instance, arm_index)?;
    xi_gamma_from_parts(instance.gamma(), arm.variance(), gap)
}

fn xi_gamma_from_parts(gamma: f64, variance: f64, gap: f64) -> Result<XiGamma> {
    let scaled = gamma * variance;
    let h_inverse = h_inv_plus(gap * gap / 2.0)?;
    let value = 1.0 - scaled / (2.0 * gap) * (1.0 - 1.0 / h_inverse);
    let in_unit_interval = value > 0.0 && value < 1.0;
    let h_argument = scaled / (scaled - 2.0 * (1.0 - value) * gap);
    let h_value = h(h_argument)?;
    let inequality_holds = in_unit_interval.then(|| 1.0 / h_value <= 2.0 / (value * value * gap * gap));
    Ok(XiGamma { value, in_unit_interval, h_inverse, h_argument, h_value, inequality_holds })
}

/// Per-arm entries of a [`TheoryReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmTheory {
    pub index: usize,
    pub mean: f64,
    pub variance: f64,
    pub entropic_risk: f64,
    pub gap: f64,
    pub optimal: bool,
    /// Absent for the optimal arm.
    pub xi_gamma: Option<XiGamma>,
    pub xi_used: Option<f64>,
    /// True when ξ_γ was outside (0, 1) and the fallback weight was used.
    pub xi_fallback: bool,
    pub r_constant: Option<RConstant>,
    pub feasible: bool,
    /// `R_i·Δ_i` for feasible suboptimal arms.
    pub contribution: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryReport {
    pub gamma: f64,
    pub optimal_arm: usize,
    pub xi_policy: XiPolicy,
    pub arms: Vec<ArmTheory>,
    /// `Σ R_i·Δ_i` over feasible suboptimal arms.
    pub upper_bound: f64,
    /// Same sum, present only when every suboptimal arm is feasible.
    pub lower_bound: Option<f64>,
    /// Every suboptimal arm contributed to `upper_bound`.
    pub complete: bool,
}

fn xi_for_arm(gamma: f64, variance: f64, gap: f64, policy: XiPolicy) -> Result<(XiGamma, f64, bool)> {
    let xg = xi_gamma_from_parts(gamma, variance, gap)?;
    let (used, fallback) = match policy {
        XiPolicy::Fixed { xi } => (xi, false),
        XiPolicy::XiGamma { .. } if xg.in_unit_interval => (xg.value, false),
        XiPolicy::XiGamma { fallback } => (fallback, true),
    };
    Ok((xg, used, fallback))
}

/// `R_i` for arm `i` under a ξ policy.
pub fn r_constant_with(instance: &BanditInstance, arm_index: usize, policy: XiPolicy) -> Result<RConstant> {
    policy.validate()?;
    let (arm, gap) = suboptimal_arm(instance, arm_index)?;
    let (_, xi, _) = xi_for_arm(instance.gamma(), arm.variance(), gap, policy)?;
    Ok(r_from_parts(instance.gamma(), arm.variance(), gap, xi))
}

/// Per-arm constants under a ξ policy. Never fails on infeasibility; each
/// arm carries its own flag.
pub fn arm_theory(instance: &BanditInstance, policy: XiPolicy) -> Result<Vec<ArmTheory>> {
    policy.validate()?;
    let gamma = instance.gamma();
    let optimal = instance.optimal_arm();
    let mut arms = Vec::with_capacity(instance.num_arms());
    for (index, spec) in instance.arms().iter().enumerate() {
        let gap = instance.gap(index)?;
        let mut entry = ArmTheory {
            index,
            mean: spec.mean(),
            variance: spec.variance(),
            entropic_risk: instance.entropic_risk(index)?,
            gap,
            optimal: index == optimal,
            xi_gamma: None,
            xi_used: None,
            xi_fallback: false,
            r_constant: None,
            feasible: true,
            contribution: None,
        };
        if index != optimal {
            let (xg, xi, fallback) = xi_for_arm(gamma, spec.variance(), gap, policy)?;
            let r = r_from_parts(gamma, spec.variance(), gap, xi);
            entry.xi_gamma = Some(xg);
            entry.xi_used = Some(xi);
            entry.xi_fallback = fallback;
            entry.r_constant = Some(r);
            entry.feasible = r.is_feasible();
            entry.contribution = r.value().map(|value| value * gap);
        }
        arms.push(entry);
    }
    Ok(arms)
}

/// Asymptotic regret constant `Σ_{i≠1} R_i·Δ_i` with full per-arm detail.
/// Infeasible arms are flagged and left out of the sum; if no suboptimal
/// arm is feasible the report is an error.
pub fn asymptotic_upper_bound(instance: &BanditInstance, policy: XiPolicy) -> Result<TheoryReport> {
    let arms = arm_theory(instance, policy)?;
    let mut upper_bound = 0.0;
    let mut any_feasible = false;
    let mut complete = true;
    for entry in arms.iter().filter(|a| !a.optimal) {
        match entry.contribution {
            Some(c) => {
                upper_bound += c;
                any_feasible = true;
            }
            None => complete = false,
        }
    }
    if !any_feasible {
        return Err(Error::AllInfeasible);
    }
    let lower_bound = if complete { Some(lower_bound(instance, policy)?) } else { None };

    Ok(TheoryReport {
        gamma: instance.gamma(),
        optimal_arm: instance.optimal_arm(),
        xi_policy: policy,
        arms,
        upper_bound,
        lower_bound,
        complete,
    })
}

/// Lower bound `Σ_{i≠1} R_i·Δ_i` for consistent policies. Any infeasible
/// arm is an error.
pub fn lower_bound(instance: &BanditInstance, policy: XiPolicy) -> Result<f64> {
    policy.validate()?;
    let mut total = 0.0;
    for index in instance.suboptimal_arms() {
        let (arm, gap) = suboptimal_arm(instance, index)?;
        let (_, xi, _) = xi_for_arm(instance.gamma(), arm.variance(), gap, policy)?;
        match r_from_parts(instance.gamma(), arm.variance(), gap, xi) {
            RConstant::Feasible { value, .. } => total += value * gap,
            RConstant::Infeasible { denominator, .. } => {
                return Err(Error::Infeasible { arm: index, denominator })
            }
        }
    }
    Ok(total)
}

/// Tail bound `P(X ≥ x) ≤ exp(−2α·h(βx/α))` for `X ~ Gamma(α, β)` (rate β),
/// valid for `α ≥ 2` and `x > α/β`.
pub fn gamma_tail_bound(alpha: f64, beta: f64, x: f64) -> Result<f64> {
    finite("alpha", alpha)?;
    if alpha < 2.0 {
        return Err(Error::Domain { name: "alpha", value: alpha, reason: "must be >= 2" });
    }
    positive("beta", beta)?;
    finite("x", x)?;
    if x <= alpha / beta {
        return Err(Error::Domain { name: "x", value: x, reason: "must exceed alpha/beta" });
    }
    Ok((-2.0 * alpha * h_unchecked(beta * x / alpha)).exp())
}

/// Exact survival `P(X ≥ x)` of `Gamma(α, β)` (rate β), via the regularized
/// upper incomplete gamma function.
pub fn gamma_survival(alpha: f64, beta: f64, x: f64) -> Result<f64> {
    positive("alpha", alpha)?;
    positive("beta", beta)?;
    positive("x", x)?;
    checked_gamma_ur(alpha, beta * x).map_err(|_| Error::Domain {
        name: "x",
        value: x,
        reason: "incomplete gamma evaluation failed",
    })
}

/// The alternative arm `N(μ_i + σ_i√(2/R_i) + ε, σ_i²)` and its checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub arm: ArmSpec,
    pub epsilon: f64,
    pub r_constant: f64,
    /// `kl_gaussian(ν(i), witness)`.
    pub kl: f64,
    /// `1/R_i + (2σ_i√(2/R_i) + ε)ε/(2σ_i²)`.
    pub kl_identity: f64,
    /// `ER(witness) − ER(ν(i))`; equals `−(σ_i√(2/R_i) + ε)`.
    pub er_shift: f64,
    /// `ER(witness) − ER(optimal arm)`.
    pub er_margin_vs_optimal: f64,
    /// `er_margin_vs_optimal < 0`: the witness beats the optimal arm.
    pub beats_optimal: bool,
}

pub fn lower_bound_witness(
    instance: &BanditInstance,
    arm_index: usize,
    policy: XiPolicy,
    epsilon: f64,
) -> Result<Witness> {
    positive("epsilon", epsilon)?;
    let (arm, _) = suboptimal_arm(instance, arm_index)?;
    let r = match r_constant_with(instance, arm_index, policy)? {
        RConstant::Feasible { value, .. } => value,
        RConstant::Infeasible { denominator, .. } => {
            return Err(Error::Infeasible { arm: arm_index, denominator })
        }
    };
    let sigma = arm.std_dev();
    let shift = sigma * (2.0 / r).sqrt();
    let witness = ArmSpec::new(arm.mean() + shift + epsilon, arm.variance())?;
    let gamma = instance.gamma();
    let witness_er = witness.entropic_risk(gamma)?;
    let er_margin_vs_optimal = witness_er - instance.entropic_risk(instance.optimal_arm())?;

    Ok(Witness {
        arm: witness,
        epsilon,
        r_constant: r,
        kl: kl_gaussian(arm, &witness),
        kl_identity: 1.0 / r + (2.0 * shift + epsilon) * epsilon / (2.0 * arm.variance()),
        er_shift: witness_er - arm.entropic_risk(gamma)?,
        er_margin_vs_optimal,
        beats_optimal: er_margin_vs_optimal < 0.0,
    })
}
