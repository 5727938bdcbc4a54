//! Parallel Monte-Carlo execution of end-to-end learning trials.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gaussian_tomo_core::bounds::{derivation_path_bound, plan_queries, QueryPlan};
use gaussian_tomo_core::rng::{derive_seed, stream};
use gaussian_tomo_core::tomography::{learn_unitary, Stage, TrialFailure, UnitaryOracle};
use gaussian_tomo_core::{Error, GaussianUnitary};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, InstanceSource};
use crate::error::{HarnessError, Result};
use crate::instance::{random_unitary, write_json, MatrixRecord};
use crate::stats::{clopper_pearson, Spread};
use crate::tolerances;

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureCode {
    EnergyConstraint,
    RegularizationDomain,
    BoundPrecondition,
    Numeric,
    Other,
}

impl FailureCode {
    pub fn of(e: &Error) -> FailureCode {
        match e {
            Error::EnergyConstraint { .. } => FailureCode::EnergyConstraint,
            Error::RegularizationDomain { .. } => FailureCode::RegularizationDomain,
            Error::BoundDomain(_) => FailureCode::BoundPrecondition,
            Error::Convergence { .. } | Error::Numeric(_) | Error::NonFinite | Error::NotSymplectic { .. } => {
                FailureCode::Numeric
            }
            _ => FailureCode::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FailureCode::EnergyConstraint => "energy_constraint",
            FailureCode::RegularizationDomain => "regularization_domain",
            FailureCode::BoundPrecondition => "bound_precondition",
            FailureCode::Numeric => "numeric",
            FailureCode::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub code: FailureCode,
    pub stage: Stage,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryCounts {
    pub symplectic: u64,
    pub displacement: u64,
    pub total: u64,
    pub planned: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flags {
    /// `combined_diamond_bound(ε_S, ε_r) ≤ ε`: the trial's success criterion.
    pub combined_bound_ok: bool,
    pub eps_s_within_budget: bool,
    pub eps_r_within_budget: bool,
    pub queries_match_plan: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimates {
    pub r_tilde: Vec<f64>,
    pub s_tilde: MatrixRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub schema_version: u32,
    pub config_hash: String,
    pub trial: u64,
    pub instance_seed: u64,
    pub learner_seed: u64,
    pub failure: Option<FailureRecord>,
    pub eps_s: Option<f64>,
    pub eps_r: Option<f64>,
    pub delta_protocol: Option<f64>,
    pub delta_lemma: Option<f64>,
    pub combined_bound: Option<f64>,
    /// Sum of the two bounds the combined bound is derived from.
    pub derivation_path_bound: Option<f64>,
    pub flags: Flags,
    pub queries: QueryCounts,
    pub estimates: Option<Estimates>,
    pub wall_time_ms: f64,
}

impl TrialReport {
    pub fn success(&self) -> bool {
        self.failure.is_none() && self.flags.combined_bound_ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub plan: QueryPlan,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    /// 95% Clopper–Pearson interval.
    pub ci_low: f64,
    pub ci_high: f64,
    /// `1 − δ − k·σ`.
    pub threshold: f64,
    pub passed: bool,
    pub failures: BTreeMap<String, u64>,
    pub eps_s_within_budget: u64,
    pub eps_r_within_budget: u64,
    pub eps_s: Option<Spread>,
    pub eps_r: Option<Spread>,
    pub combined_bound: Option<Spread>,
    pub total_queries: u64,
    pub queries_match_plan: bool,
}

/// Plan for `config`, with the shot override applied.
pub fn experiment_plan(config: &ExperimentConfig) -> Result<QueryPlan> {
    let plan = plan_queries(config.problem, config.sym_variant, config.disp_variant)
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(match config.shots {
        Some(s) => plan.with_shots(s.n_s, s.n_r),
        None => plan,
    })
}

fn instance_seed(config: &ExperimentConfig, trial: u64) -> u64 {
    let base = match config.instance {
        InstanceSource::Random { seed: Some(s), .. } => s,
        _ => config.master_seed,
    };
    derive_seed(base, trial, stream::INSTANCE)
}

pub fn run_trial(
    config: &ExperimentConfig,
    plan: &QueryPlan,
    explicit: Option<&GaussianUnitary>,
    config_hash: &str,
    trial: u64,
) -> Result<TrialReport> {
    let start = Instant::now();
    let inst_seed = instance_seed(config, trial);
    let learner_seed = derive_seed(config.master_seed, trial, stream::MEASUREMENT);
    let p = &config.problem;
    let hidden = match (explicit, &config.instance) {
        (Some(g), _) => g.clone(),
        (None, InstanceSource::Random { z_pinned, r_scale, .. }) => {
            random_unitary(p.m, p.z, *r_scale, *z_pinned, inst_seed)?
        }
        (None, InstanceSource::Explicit { .. }) => {
            return Err(HarnessError::Config("explicit instance was not loaded".into()));
        }
    };
    let mut oracle = UnitaryOracle::new(hidden.clone(), p.n_bar_in, config.accounting)?;
    let result = learn_unitary(&mut oracle, plan, learner_seed);

    let mut report = TrialReport {
        schema_version: REPORT_SCHEMA,
        config_hash: config_hash.to_owned(),
        trial,
        instance_seed: inst_seed,
        learner_seed,
        failure: None,
        eps_s: None,
        eps_r: None,
        delta_protocol: None,
        delta_lemma: None,
        combined_bound: None,
        derivation_path_bound: None,
        flags: Flags {
            combined_bound_ok: false,
            eps_s_within_budget: false,
            eps_r_within_budget: false,
            queries_match_plan: false,
        },
        queries: QueryCounts {
            symplectic: 0,
            displacement: 0,
            total: 0,
            planned: plan.n_tot,
        },
        estimates: None,
        wall_time_ms: 0.0,
    };
    match result {
        Ok(out) => {
            let rep = &out.report;
            report.eps_s = Some(rep.eps_s_true);
            report.eps_r = Some(rep.eps_r_true);
            report.delta_protocol = Some(rep.delta_protocol);
            report.delta_lemma = Some(rep.delta_lemma);
            report.combined_bound = rep.combined_bound;
            report.derivation_path_bound = derivation_path_bound(
                hidden.symplectic(),
                &out.symplectic.s_tilde,
                hidden.displacement(),
                &out.displacement.r_tilde,
                p.z,
                p.n_bar,
            )
            .ok();
            report.flags.eps_s_within_budget = rep.eps_s_true <= plan.eps_s;
            report.flags.eps_r_within_budget = rep.eps_r_true <= plan.eps_r;
            match rep.combined_bound {
                Some(b) => report.flags.combined_bound_ok = b <= p.epsilon,
                None => {
                    report.failure = Some(FailureRecord {
                        code: FailureCode::BoundPrecondition,
                        stage: Stage::Report,
                        message: format!("z * eps_S = {} is not below 1/2", p.z * rep.eps_s_true),
                    })
                }
            }
            report.queries.symplectic = rep.symplectic_queries;
            report.queries.displacement = rep.displacement_queries;
            report.queries.total = rep.total_queries;
            report.estimates = Some(Estimates {
                r_tilde: out.displacement.r_tilde.iter().copied().collect(),
                s_tilde: MatrixRecord::from_matrix(out.symplectic.s_tilde.as_matrix()),
            });
        }
        Err(TrialFailure {
            stage,
            error,
            queries_used,
        }) => {
            report.failure = Some(FailureRecord {
                code: FailureCode::of(&error),
                stage,
                message: error.to_string(),
            });
            report.queries.total = queries_used;
        }
    }
    report.flags.queries_match_plan = report.queries.total == plan.n_tot;
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

/// Aggregates trial reports; independent of report order.
pub fn summarize(config: &ExperimentConfig, plan: &QueryPlan, reports: &[TrialReport]) -> Summary {
    let mut sorted: Vec<&TrialReport> = reports.iter().collect();
    sorted.sort_by_key(|r| r.trial);
    let trials = sorted.len() as u64;
    let successes = sorted.iter().filter(|r| r.success()).count() as u64;
    let mut failures = BTreeMap::new();
    for r in &sorted {
        if let Some(f) = &r.failure {
            *failures.entry(f.code.as_str().to_owned()).or_insert(0) += 1;
        }
    }
    let collect = |f: fn(&TrialReport) -> Option<f64>| -> Vec<f64> { sorted.iter().filter_map(|r| f(r)).collect() };
    let rate = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
    let (ci_low, ci_high) = clopper_pearson(successes, trials, 0.95);
    let threshold = tolerances::binomial_floor(config.problem.delta, trials.max(1), config.tolerances.binomial_sigmas);
    let queries_match_plan = sorted.iter().all(|r| r.flags.queries_match_plan);
    Summary {
        schema_version: REPORT_SCHEMA,
        config_hash: config.hash(),
        config: config.clone(),
        plan: plan.clone(),
        trials,
        successes,
        success_rate: rate,
        ci_low,
        ci_high,
        threshold,
        passed: trials > 0 && rate >= threshold,
        failures,
        eps_s_within_budget: sorted.iter().filter(|r| r.flags.eps_s_within_budget).count() as u64,
        eps_r_within_budget: sorted.iter().filter(|r| r.flags.eps_r_within_budget).count() as u64,
        eps_s: Spread::of(&collect(|r| r.eps_s)),
        eps_r: Spread::of(&collect(|r| r.eps_r)),
        combined_bound: Spread::of(&collect(|r| r.combined_bound)),
        total_queries: sorted.iter().map(|r| r.queries.total).sum(),
        queries_match_plan,
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
    /// Overrides `config.output_dir`.
    pub out_dir: Option<PathBuf>,
}

pub struct RunOutput {
    pub summary: Summary,
    pub reports: Vec<TrialReport>,
}

pub fn report_path(dir: &Path, trial: u64) -> PathBuf {
    dir.join("reports").join(format!("trial_{trial:06}.json"))
}

/// Runs all trials, writing `reports/trial_*.json` and `summary.json` when an
/// output directory is configured.
pub fn run_experiment(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutput> {
    config.validate().map_err(HarnessError::Config)?;
    let plan = experiment_plan(config)?;
    let explicit = config.load_instance()?;
    let hash = config.hash();
    let out_dir = opts.out_dir.clone().or_else(|| config.output_dir.clone());

    let work = || -> Result<Vec<TrialReport>> {
        (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let report = run_trial(config, &plan, explicit.as_ref(), &hash, t)?;
                if let Some(dir) = &out_dir {
                    write_json(&report_path(dir, t), &report)?;
                }
                Ok(report)
            })
            .collect()
    };
    let reports = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let summary = summarize(config, &plan, &reports);
    if let Some(dir) = &out_dir {
        write_json(&dir.join("summary.json"), &summary)?;
    }
    Ok(RunOutput { summary, reports })
}
