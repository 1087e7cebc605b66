//! Acceptance criteria. Each test prints one `criterion N: PASS|FAIL ...`
//! line; run with `--nocapture` to see them.

use std::fs;
use std::time::{Duration, Instant};

use erts_bandit::cli::validate::{fold_updates, grid_instance, log_grid, states_agree, theory_grid};
use erts_bandit::cli::{cmd_simulate, ExperimentConfig};
use erts_bandit::gamma::sample_gamma;
use erts_bandit::posterior::{batch_posterior, update};
use erts_bandit::risk::{er_empirical, er_gaussian, BanditInstance};
use erts_bandit::simulator::run_many;
use erts_bandit::theory::{self, XiPolicy};
use erts_bandit::Policy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

fn report(id: u32, passed: bool, elapsed: Duration, limit: Duration, detail: String) {
    let within = elapsed <= limit;
    let ok = passed && within;
    let status = if ok { "PASS" } else { "FAIL" };
    println!("criterion {id}: {status} ({elapsed:.2?}, limit {limit:?}) {detail}");
    assert!(passed, "criterion {id} failed: {detail}");
    assert!(within, "criterion {id} exceeded its runtime limit: {elapsed:?} > {limit:?}");
}

fn reference(gamma: f64) -> BanditInstance {
    BanditInstance::from_pairs(&[(1.0, 1.0), (0.0, 1.0)], gamma, 2.0).unwrap()
}

#[test]
fn criterion_1_posterior_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let len = rng.random_range(1..=1000);
        let xs: Vec<f64> = (0..len).map(|_| rng.random_range(-100.0..=100.0)).collect();
        let seq = fold_updates(update, &xs).unwrap();
        if !states_agree(&seq, &batch_posterior(&xs).unwrap(), 1e-10) {
            mismatches += 1;
        }
    }
    report(1, mismatches == 0, start.elapsed(), Duration::from_secs(10), format!("{mismatches}/1000 sequences disagree"));
}

#[test]
fn criterion_2_closed_form_er_vs_monte_carlo() {
    let start = Instant::now();
    let mut grid = Vec::new();
    for mean in [-1.0, 0.0, 1.0] {
        for variance in [0.25, 1.0, 2.0] {
            for gamma in [0.1, 0.5, 1.0] {
                grid.push((mean, variance, gamma));
            }
        }
    }
    let hits: Vec<usize> = (0..10u64)
        .map(|seed| {
            grid.par_iter()
                .enumerate()
                .filter(|&(k, &(mean, variance, gamma))| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed * 1000 + k as u64);
                    let normal = Normal::new(mean, f64::sqrt(variance)).unwrap();
                    let xs: Vec<f64> = (0..1_000_000).map(|_| normal.sample(&mut rng)).collect();
                    let emp = er_empirical(&xs, gamma).unwrap();
                    (emp - er_gaussian(mean, variance, gamma).unwrap()).abs() <= 0.01
                })
                .count()
        })
        .collect();
    let worst = *hits.iter().min().unwrap();
    report(2, worst >= 26, start.elapsed(), Duration::from_secs(60), format!("per-seed hits out of 27: {hits:?}"));
}

#[test]
fn criterion_3_h_inverse_round_trips() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut ordered = true;
    for y in log_grid(1e-6, 1e2, 81) {
        let (up, down) = (theory::h_inv_plus(y).unwrap(), theory::h_inv_minus(y).unwrap());
        worst = worst.max((theory::h(up).unwrap() - y).abs()).max((theory::h(down).unwrap() - y).abs());
        ordered &= down <= 1.0 && 1.0 <= up;
    }
    report(3, worst <= 1e-12 && ordered, start.elapsed(), Duration::from_secs(1), format!("max |h(h⁻¹(y)) − y| = {worst:e}, branches ordered: {ordered}"));
}

#[test]
fn criterion_4_xi_gamma_inequality() {
    let start = Instant::now();
    let (mut checked, mut failed, mut outside) = (0, 0, Vec::new());
    for (gamma, gap, variance) in theory_grid() {
        let xg = theory::xi_gamma(&grid_instance(gamma, gap, variance), 1).unwrap();
        if xg.in_unit_interval {
            checked += 1;
            if xg.inequality_holds != Some(true) {
                failed += 1;
            }
        } else {
            outside.push((gamma, gap, variance, xg.value));
        }
    }
    let detail = format!("{checked} instances checked, {failed} violations, ξ_γ outside (0,1) at {outside:?}");
    report(4, failed == 0 && checked > 0, start.elapsed(), Duration::from_secs(1), detail);
}

#[test]
fn criterion_5_risk_neutral_limit() {
    let start = Instant::now();
    let bound = theory::asymptotic_upper_bound(&reference(1e-3), XiPolicy::default()).unwrap().upper_bound;
    let rel = (bound - 2.0).abs() / 2.0;
    report(5, rel <= 0.05, start.elapsed(), Duration::from_secs(1), format!("bound {bound:.6}, relative error {rel:.4}"));
}

#[test]
fn criterion_6_witness_identities() {
    let start = Instant::now();
    let policy = XiPolicy::XiGamma { fallback: 0.9 };
    let (mut cases, mut kl_fail, mut shift_vs_arm_fail, mut vs_optimal_fail) = (0, 0, 0, 0);
    let mut worst_margin = f64::NEG_INFINITY;
    for (gamma, gap, variance) in theory_grid() {
        let inst = grid_instance(gamma, gap, variance);
        if !theory::r_constant_with(&inst, 1, policy).unwrap().is_feasible() {
            continue;
        }
        for eps in [1.0, 0.1, 0.01] {
            let w = theory::lower_bound_witness(&inst, 1, policy, eps).unwrap();
            let shift = variance.sqrt() * (2.0 / w.r_constant).sqrt() + eps;
            cases += 1;
            kl_fail += usize::from((w.kl - w.kl_identity).abs() > 1e-12);
            shift_vs_arm_fail += usize::from((w.er_shift + shift).abs() > 1e-12);
            // Stated identity: ER(witness) − ER(optimal arm) = −(σ√(2/R) + ε).
            let miss = (w.er_margin_vs_optimal + shift).abs();
            vs_optimal_fail += usize::from(miss > 1e-12);
            worst_margin = worst_margin.max(w.er_margin_vs_optimal);
        }
    }
    let detail = format!(
        "{cases} cases: KL identity misses {kl_fail}, ER shift vs arm i misses {shift_vs_arm_fail}, \
         ER shift vs optimal arm misses {vs_optimal_fail} (largest ER(witness) − ER(optimal) = {worst_margin:.4}; \
         the identity holds against arm i, not the optimal arm)"
    );
    let passed = cases > 0 && kl_fail == 0 && shift_vs_arm_fail == 0 && vs_optimal_fail == 0;
    report(6, passed, start.elapsed(), Duration::from_secs(1), detail);
}

#[test]
fn criterion_7_gamma_tail_bound() {
    let start = Instant::now();
    let mut points = Vec::new();
    for alpha in [2.0, 3.0, 5.0] {
        for beta in [0.5, 1.0, 2.0] {
            for scale in [1.5, 2.0, 4.0] {
                points.push((alpha, beta, scale * alpha / beta));
            }
        }
    }
    let draws = 1_000_000;
    let failures: Vec<String> = points
        .par_iter()
        .enumerate()
        .filter_map(|(k, &(alpha, beta, x))| {
            let bound = theory::gamma_tail_bound(alpha, beta, x).unwrap();
            let exact = theory::gamma_survival(alpha, beta, x).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(700 + k as u64);
            let above = (0..draws).filter(|_| sample_gamma(&mut rng, alpha, beta).unwrap() >= x).count();
            let p = above as f64 / draws as f64;
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            (exact > bound || p > bound + 3.0 * se)
                .then(|| format!("(α {alpha}, β {beta}, x {x}): exact {exact:e}, empirical {p:e}, bound {bound:e}"))
        })
        .collect();
    let detail = format!("{} grid points, failures: {failures:?}", points.len());
    report(7, failures.is_empty(), start.elapsed(), Duration::from_secs(60), detail);
}

#[test]
fn criterion_8_erts_regret_behaviour() {
    let start = Instant::now();
    let inst = reference(1.0);
    let horizon = 50_000;
    let theory = theory::asymptotic_upper_bound(&inst, XiPolicy::XiGamma { fallback: 0.9 }).unwrap();
    let constant = theory.upper_bound;
    let erts = run_many(&inst, Policy::Erts, horizon, 200, 8).unwrap();
    let uniform = run_many(&inst, Policy::Uniform, horizon, 200, 8).unwrap();

    let ratio_end = erts.regret_over_log_n(horizon).unwrap();
    let ratio_1e3 = erts.regret_over_log_n(1_000).unwrap();
    let fraction = erts.mean_pull_fractions[inst.optimal_arm()];
    let (r_erts, r_uniform) = (erts.mean_regret_at(horizon).unwrap(), uniform.mean_regret_at(horizon).unwrap());

    let a = ratio_end <= 3.0 * constant;
    let b = ratio_end < ratio_1e3;
    let c = fraction >= 0.95;
    let d = r_erts <= r_uniform / 10.0;
    let detail = format!(
        "(a) R/log n = {ratio_end:.3} vs 3×{constant:.3} {a}; (b) {ratio_end:.3} < {ratio_1e3:.3} at n=10³ {b}; \
         (c) optimal fraction {fraction:.4} {c}; (d) ERTS {r_erts:.1} vs uniform {r_uniform:.1} {d}"
    );
    report(8, a && b && c && d, start.elapsed(), Duration::from_secs(600), detail);
}

#[test]
fn criterion_9_simulate_determinism() {
    let start = Instant::now();
    let config = ExperimentConfig::from_json(
        r#"{
          "instance": {"arms": [{"mean": 1.0, "variance": 1.0}, {"mean": 0.0, "variance": 1.0}], "gamma": 1.0, "sigma_max_sq": 2.0},
          "policies": [{"kind": "erts"}, {"kind": "uniform"}, {"kind": "ftl_er"}],
          "horizon": 10000,
          "n_runs": 20,
          "root_seed": 42
        }"#,
    )
    .unwrap();
    let experiment = config.validate().unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let (first, second) = (tmp.path().join("first"), tmp.path().join("second"));
    let a = cmd_simulate(&experiment, &first).unwrap();
    let b = cmd_simulate(&experiment, &second).unwrap();
    let mut differing = Vec::new();
    for (x, y) in [(&a.csv, &b.csv), (&a.summary, &b.summary), (&a.plot, &b.plot)] {
        if fs::read(x).unwrap() != fs::read(y).unwrap() {
            differing.push(x.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    report(9, differing.is_empty(), start.elapsed(), Duration::from_secs(60), format!("differing outputs: {differing:?}"));
}
