//! The `simulate` and `theory` commands.
//!
//! Output files (all deterministic functions of the configuration):
//!
//! - CSV with columns `policy,n,mean_regret,std_regret,regret_over_log_n,theory_upper,theory_lower`,
//!   one row per (policy, checkpoint). Theory columns are empty when no bound exists.
//! - JSON summary with the theory report and per-policy aggregates.
//! - Whitespace-delimited plot data: `round` followed by `mean std` per policy.
//! - JSON theory report (`theory` command).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use super::config::{Experiment, SCHEMA_VERSION};
use crate::policies::Policy;
use crate::risk::BanditInstance;
use crate::simulator::{regret_vs_theory, run_many, AggregateResult, ComparisonRow};
use crate::theory::{self, ArmTheory, TheoryReport, Witness, XiPolicy};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessEntry {
    pub arm: usize,
    pub feasible: bool,
    pub witness: Option<Witness>,
}

/// Everything the theory engine knows about an instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryDocument {
    pub schema_version: u32,
    pub instance: BanditInstance,
    pub gamma: f64,
    pub optimal_arm: usize,
    pub xi_policy: XiPolicy,
    pub arms: Vec<ArmTheory>,
    /// `Σ R_i·Δ_i` over feasible arms; absent when no arm is feasible.
    pub upper_bound: Option<f64>,
    /// Present only when every suboptimal arm is feasible.
    pub lower_bound: Option<f64>,
    pub complete: bool,
    pub witness_epsilon: f64,
    pub witnesses: Vec<WitnessEntry>,
}

impl TheoryDocument {
    fn report(&self) -> Option<TheoryReport> {
        Some(TheoryReport {
            gamma: self.gamma,
            optimal_arm: self.optimal_arm,
            xi_policy: self.xi_policy,
            arms: self.arms.clone(),
            upper_bound: self.upper_bound?,
            lower_bound: self.lower_bound,
            complete: self.complete,
        })
    }
}

pub fn theory_document(instance: &BanditInstance, xi: XiPolicy, witness_epsilon: f64) -> crate::Result<TheoryDocument> {
    let arms = theory::arm_theory(instance, xi)?;
    let (upper_bound, lower_bound, complete) = match theory::asymptotic_upper_bound(instance, xi) {
        Ok(report) => (Some(report.upper_bound), report.lower_bound, report.complete),
        Err(crate::Error::AllInfeasible) => (None, None, false),
        Err(e) => return Err(e),
    };
    let mut witnesses = Vec::new();
    for entry in arms.iter().filter(|a| !a.optimal) {
        let witness = if entry.feasible {
            Some(theory::lower_bound_witness(instance, entry.index, xi, witness_epsilon)?)
        } else {
            None
        };
        witnesses.push(WitnessEntry { arm: entry.index, feasible: entry.feasible, witness });
    }
    Ok(TheoryDocument {
        schema_version: SCHEMA_VERSION,
        instance: instance.clone(),
        gamma: instance.gamma(),
        optimal_arm: instance.optimal_arm(),
        xi_policy: xi,
        arms,
        upper_bound,
        lower_bound,
        complete,
        witness_epsilon,
        witnesses,
    })
}

fn create_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("output.dir: cannot create {}", dir.display()))
}

fn write_file(path: &Path, field: &str, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("{field}: cannot write {}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes the theory report; infeasible arms are flagged in-band.
pub fn cmd_theory(experiment: &Experiment, out_dir: &Path) -> Result<PathBuf> {
    let cfg = &experiment.config;
    let doc = theory_document(&experiment.instance, cfg.xi, cfg.witness_epsilon)?;
    create_out_dir(out_dir)?;
    let path = out_dir.join(&cfg.output.theory);
    write_file(&path, "output.theory", &to_json(&doc)?)?;
    Ok(path)
}

#[derive(Debug, Clone)]
pub struct SimulateOutputs {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub plot: PathBuf,
    pub aggregates: Vec<AggregateResult>,
    pub theory: TheoryDocument,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    policy: &'a str,
    n: usize,
    mean_regret: f64,
    std_regret: f64,
    regret_over_log_n: f64,
    theory_upper: Option<f64>,
    theory_lower: Option<f64>,
}

#[derive(Serialize)]
struct ExperimentEcho<'a> {
    instance: &'a BanditInstance,
    policies: &'a [Policy],
    horizon: usize,
    n_runs: usize,
    root_seed: u64,
    checkpoints: &'a [usize],
    xi: XiPolicy,
    witness_epsilon: f64,
}

#[derive(Serialize)]
struct PolicySummary<'a> {
    policy: Policy,
    label: String,
    n_runs: usize,
    horizon: usize,
    mean_pull_fractions: &'a [f64],
    final_mean_regret: f64,
    final_std_regret: f64,
    checkpoints: Vec<ComparisonRow>,
}

#[derive(Serialize)]
struct Summary<'a> {
    schema_version: u32,
    experiment: ExperimentEcho<'a>,
    theory: &'a TheoryDocument,
    results: Vec<PolicySummary<'a>>,
}

/// Runs every configured policy and writes the CSV, JSON summary and plot data.
pub fn cmd_simulate(experiment: &Experiment, out_dir: &Path) -> Result<SimulateOutputs> {
    let cfg = &experiment.config;
    let instance = &experiment.instance;
    let checkpoints = &experiment.checkpoints;
    let doc = theory_document(instance, cfg.xi, cfg.witness_epsilon)?;
    let report = doc.report();

    let mut aggregates = Vec::with_capacity(cfg.policies.len());
    for &policy in &cfg.policies {
        let agg = run_many(instance, policy, cfg.horizon, cfg.n_runs, cfg.root_seed)
            .with_context(|| format!("simulating policy {policy}"))?;
        aggregates.push(agg);
    }

    let mut tables = Vec::with_capacity(aggregates.len());
    for agg in &aggregates {
        tables.push(regret_vs_theory(agg, report.as_ref(), checkpoints)?);
    }

    create_out_dir(out_dir)?;

    let mut csv = csv::Writer::from_writer(Vec::new());
    for (agg, rows) in aggregates.iter().zip(&tables) {
        let label = agg.policy.label();
        for row in rows {
            csv.serialize(CsvRow {
                policy: &label,
                n: row.n,
                mean_regret: row.mean_regret,
                std_regret: row.std_regret,
                regret_over_log_n: row.regret_over_log_n,
                theory_upper: row.theory_upper,
                theory_lower: row.theory_lower,
            })?;
        }
    }
    let csv_bytes = csv.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))?;
    let csv_path = out_dir.join(&cfg.output.csv);
    write_file(&csv_path, "output.csv", &csv_bytes)?;

    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        experiment: ExperimentEcho {
            instance,
            policies: &cfg.policies,
            horizon: cfg.horizon,
            n_runs: cfg.n_runs,
            root_seed: cfg.root_seed,
            checkpoints,
            xi: cfg.xi,
            witness_epsilon: cfg.witness_epsilon,
        },
        theory: &doc,
        results: aggregates
            .iter()
            .zip(tables)
            .map(|(agg, rows)| PolicySummary {
                policy: agg.policy,
                label: agg.policy.label(),
                n_runs: agg.n_runs,
                horizon: agg.horizon,
                mean_pull_fractions: &agg.mean_pull_fractions,
                final_mean_regret: agg.mean_regret_trajectory[agg.horizon - 1],
                final_std_regret: agg.std_regret_trajectory[agg.horizon - 1],
                checkpoints: rows,
            })
            .collect(),
    };
    let summary_path = out_dir.join(&cfg.output.summary);
    write_file(&summary_path, "output.summary", &to_json(&summary)?)?;

    let plot_path = out_dir.join(&cfg.output.plot);
    write_file(&plot_path, "output.plot", &plot_data(&aggregates)?)?;

    Ok(SimulateOutputs {
        csv: csv_path,
        summary: summary_path,
        plot: plot_path,
        aggregates,
        theory: doc,
    })
}

fn plot_data(aggregates: &[AggregateResult]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    writeln!(out, "# schema_version {SCHEMA_VERSION}")?;
    write!(out, "# round")?;
    for agg in aggregates {
        let label = agg.policy.label();
        write!(out, " {label}_mean {label}_std")?;
    }
    writeln!(out)?;
    let horizon = aggregates.first().map_or(0, |a| a.horizon);
    for t in 0..horizon {
        write!(out, "{}", t + 1)?;
        for agg in aggregates {
            write!(out, " {} {}", agg.mean_regret_trajectory[t], agg.std_regret_trajectory[t])?;
        }
        writeln!(out)?;
    }
    Ok(out)
}
