//! Fast invariant suite run by `erts validate`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::posterior::{batch_posterior, PosteriorState};
use crate::risk::{er_empirical, er_gaussian, BanditInstance};
use crate::theory::{self, XiPolicy};

/// Sequential posterior update under test.
pub type UpdateFn = fn(&PosteriorState, f64) -> crate::Result<PosteriorState>;

/// Risk levels of the theory grid.
pub const GRID_GAMMAS: [f64; 4] = [0.1, 0.5, 1.0, 2.0];
/// Gaps of the theory grid.
pub const GRID_GAPS: [f64; 3] = [0.25, 0.5, 1.0];
/// Suboptimal-arm variances of the theory grid.
pub const GRID_VARIANCES: [f64; 3] = [0.5, 1.0, 2.0];

/// Two arms of equal variance whose entropic risks differ by `gap`; arm 1
/// is the suboptimal one.
pub fn grid_instance(gamma: f64, gap: f64, variance: f64) -> BanditInstance {
    BanditInstance::from_pairs(&[(gap, variance), (0.0, variance)], gamma, 4.0)
        .expect("grid instances are valid")
}

/// Every `(gamma, gap, variance)` point of the theory grid.
pub fn theory_grid() -> impl Iterator<Item = (f64, f64, f64)> {
    GRID_GAMMAS.into_iter().flat_map(|g| {
        GRID_GAPS
            .into_iter()
            .flat_map(move |d| GRID_VARIANCES.into_iter().map(move |v| (g, d, v)))
    })
}

/// `n` points spaced evenly in log10 between `lo` and `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..n).map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64)).collect()
}

/// `|a − b| ≤ tol·max(|a|, |b|)`.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    /// First failing case, if any.
    pub failure: Option<String>,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "ok" } else { "FAILED" };
        write!(f, "{status:>6}  {} ({} cases)", self.name, self.cases)?;
        if let Some(why) = &self.failure {
            write!(f, ": {why}")?;
        }
        Ok(())
    }
}

struct Check {
    name: &'static str,
    cases: usize,
    failure: Option<String>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Self { name, cases: 0, failure: None }
    }

    fn case(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(describe());
        }
    }

    fn finish(self) -> CheckOutcome {
        CheckOutcome { name: self.name, passed: self.failure.is_none(), cases: self.cases, failure: self.failure }
    }
}

/// Folds `update` over `samples` from the prior.
pub fn fold_updates(update: UpdateFn, samples: &[f64]) -> crate::Result<PosteriorState> {
    samples.iter().try_fold(PosteriorState::prior(), |s, &x| update(&s, x))
}

/// Compares a sequentially updated state against the batch oracle.
pub fn states_agree(seq: &PosteriorState, batch: &PosteriorState, tol: f64) -> bool {
    seq.t_count() == batch.t_count()
        && rel_close(seq.mu_hat(), batch.mu_hat(), tol)
        && rel_close(seq.alpha(), batch.alpha(), tol)
        && rel_close(seq.beta(), batch.beta(), tol)
}

fn posterior_equivalence(update: UpdateFn, seed: u64) -> CheckOutcome {
    let mut check = Check::new("posterior_equivalence");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..200 {
        let len = rng.random_range(1..=1000);
        let xs: Vec<f64> = (0..len).map(|_| rng.random_range(-100.0..=100.0)).collect();
        let seq = fold_updates(update, &xs);
        let batch = batch_posterior(&xs);
        let ok = matches!((&seq, &batch), (Ok(s), Ok(b)) if states_agree(s, b, 1e-10));
        check.case(ok, || format!("sequence {case} (len {len}): sequential {seq:?} vs batch {batch:?}"));
    }
    check.finish()
}

fn h_round_trip() -> CheckOutcome {
    let mut check = Check::new("h_inverse_round_trip");
    for y in log_grid(1e-6, 1e2, 81) {
        let up = theory::h_inv_plus(y).and_then(|x| Ok((x, theory::h(x)?)));
        let down = theory::h_inv_minus(y).and_then(|x| Ok((x, theory::h(x)?)));
        let ok = match (up, down) {
            (Ok((xu, hu)), Ok((xd, hd))) => {
                (hu - y).abs() <= 1e-12 && (hd - y).abs() <= 1e-12 && xd <= 1.0 && 1.0 <= xu
            }
            _ => false,
        };
        check.case(ok, || format!("y = {y:e}"));
    }
    check.finish()
}

fn xi_gamma_inequality() -> CheckOutcome {
    let mut check = Check::new("xi_gamma_inequality");
    for (gamma, gap, variance) in theory_grid() {
        let inst = grid_instance(gamma, gap, variance);
        let ok = match theory::xi_gamma(&inst, 1) {
            Ok(xg) => {
                (xg.h_value - gap * gap / 2.0).abs() <= 1e-10
                    && (!xg.in_unit_interval || xg.inequality_holds == Some(true))
            }
            Err(_) => false,
        };
        check.case(ok, || format!("gamma {gamma}, gap {gap}, variance {variance}"));
    }
    check.finish()
}

fn witness_identities() -> CheckOutcome {
    let mut check = Check::new("witness_kl_identity");
    let policy = XiPolicy::XiGamma { fallback: 0.9 };
    for (gamma, gap, variance) in theory_grid() {
        let inst = grid_instance(gamma, gap, variance);
        let feasible = theory::r_constant_with(&inst, 1, policy).map(|r| r.is_feasible());
        if !matches!(feasible, Ok(true)) {
            continue;
        }
        for eps in [1.0, 0.1, 0.01] {
            let ok = match theory::lower_bound_witness(&inst, 1, policy, eps) {
                Ok(w) => {
                    let shift = variance.sqrt() * (2.0 / w.r_constant).sqrt() + eps;
                    (w.kl - w.kl_identity).abs() <= 1e-12 && (w.er_shift + shift).abs() <= 1e-12
                }
                Err(_) => false,
            };
            check.case(ok, || format!("gamma {gamma}, gap {gap}, variance {variance}, eps {eps}"));
        }
    }
    check.finish()
}

fn tail_bound_grid() -> CheckOutcome {
    let mut check = Check::new("gamma_tail_bound");
    for alpha in [2.0, 3.0, 5.0, 10.0] {
        for beta in [0.5, 1.0, 2.0] {
            for scale in [1.01, 1.5, 2.0, 4.0, 8.0] {
                let x = scale * alpha / beta;
                let ok = match (theory::gamma_survival(alpha, beta, x), theory::gamma_tail_bound(alpha, beta, x)) {
                    (Ok(sf), Ok(bound)) => sf <= bound,
                    _ => false,
                };
                check.case(ok, || format!("alpha {alpha}, beta {beta}, x {x}"));
            }
        }
    }
    check.finish()
}

fn er_closed_form(seed: u64) -> CheckOutcome {
    let mut check = Check::new("er_closed_form_vs_sample");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for &(mean, variance, gamma) in &[(0.0, 1.0, 0.5), (1.0, 0.25, 1.0), (-1.0, 2.0, 0.1)] {
        let normal = Normal::new(mean, f64::sqrt(variance)).expect("valid normal");
        let xs: Vec<f64> = (0..200_000).map(|_| normal.sample(&mut rng)).collect();
        let (emp, exact) = (er_empirical(&xs, gamma), er_gaussian(mean, variance, gamma));
        let ok = matches!((emp, exact), (Ok(e), Ok(x)) if (e - x).abs() <= 0.02);
        check.case(ok, || format!("mean {mean}, variance {variance}, gamma {gamma}"));
    }
    check.finish()
}

/// Runs every check with the given update rule.
pub fn run_invariant_suite_with(update: UpdateFn, seed: u64) -> Vec<CheckOutcome> {
    vec![
        posterior_equivalence(update, seed),
        h_round_trip(),
        xi_gamma_inequality(),
        witness_identities(),
        tail_bound_grid(),
        er_closed_form(seed),
    ]
}

pub fn run_invariant_suite(seed: u64) -> Vec<CheckOutcome> {
    run_invariant_suite_with(crate::posterior::update, seed)
}
