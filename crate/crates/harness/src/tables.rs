//! Flat per-trial and summary tables built from a run directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::instance::write_atomic;
use crate::run::{summarize, Summary, TrialReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub config_hash: String,
    pub trial: u64,
    pub instance_seed: u64,
    pub learner_seed: u64,
    pub success: bool,
    pub failure_code: String,
    pub eps_s: Option<f64>,
    pub eps_r: Option<f64>,
    pub combined_bound: Option<f64>,
    pub derivation_path_bound: Option<f64>,
    pub delta_protocol: Option<f64>,
    pub delta_lemma: Option<f64>,
    pub eps_s_within_budget: bool,
    pub eps_r_within_budget: bool,
    pub symplectic_queries: u64,
    pub displacement_queries: u64,
    pub total_queries: u64,
    pub planned_queries: u64,
    pub wall_time_ms: f64,
}

impl TrialRow {
    fn of(r: &TrialReport) -> Self {
        TrialRow {
            config_hash: r.config_hash.clone(),
            trial: r.trial,
            instance_seed: r.instance_seed,
            learner_seed: r.learner_seed,
            success: r.success(),
            failure_code: r.failure.as_ref().map_or(String::new(), |f| f.code.as_str().to_owned()),
            eps_s: r.eps_s,
            eps_r: r.eps_r,
            combined_bound: r.combined_bound,
            derivation_path_bound: r.derivation_path_bound,
            delta_protocol: r.delta_protocol,
            delta_lemma: r.delta_lemma,
            eps_s_within_budget: r.flags.eps_s_within_budget,
            eps_r_within_budget: r.flags.eps_r_within_budget,
            symplectic_queries: r.queries.symplectic,
            displacement_queries: r.queries.displacement,
            total_queries: r.queries.total,
            planned_queries: r.queries.planned,
            wall_time_ms: r.wall_time_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub config_hash: String,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub threshold: f64,
    pub passed: bool,
    pub failures: u64,
    pub eps_s_mean: Option<f64>,
    pub eps_s_p90: Option<f64>,
    pub eps_r_mean: Option<f64>,
    pub eps_r_p90: Option<f64>,
    pub combined_bound_mean: Option<f64>,
    pub combined_bound_max: Option<f64>,
    pub n_s: u64,
    pub n_r: u64,
    pub n_tot: u64,
    pub total_queries: u64,
    pub queries_match_plan: bool,
}

impl SummaryRow {
    fn of(s: &Summary) -> Self {
        SummaryRow {
            config_hash: s.config_hash.clone(),
            trials: s.trials,
            successes: s.successes,
            success_rate: s.success_rate,
            ci_low: s.ci_low,
            ci_high: s.ci_high,
            threshold: s.threshold,
            passed: s.passed,
            failures: s.failures.values().sum(),
            eps_s_mean: s.eps_s.as_ref().map(|x| x.mean),
            eps_s_p90: s.eps_s.as_ref().map(|x| x.p90),
            eps_r_mean: s.eps_r.as_ref().map(|x| x.mean),
            eps_r_p90: s.eps_r.as_ref().map(|x| x.p90),
            combined_bound_mean: s.combined_bound.as_ref().map(|x| x.mean),
            combined_bound_max: s.combined_bound.as_ref().map(|x| x.max),
            n_s: s.plan.n_s,
            n_r: s.plan.n_r,
            n_tot: s.plan.n_tot,
            total_queries: s.total_queries,
            queries_match_plan: s.queries_match_plan,
        }
    }
}

/// JSON table document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableDocument {
    pub schema_version: u32,
    pub config: crate::config::ExperimentConfig,
    pub summary: SummaryRow,
    pub trials: Vec<TrialRow>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Format {
        path: path.to_owned(),
        detail: e.to_string(),
    })
}

/// Reads `summary.json` and `reports/trial_*.json` from a run directory,
/// sorted by trial index.
pub fn load_run(dir: &Path) -> Result<(Summary, Vec<TrialReport>)> {
    let summary: Summary = read_json(&dir.join("summary.json"))?;
    let reports_dir = dir.join("reports");
    let entries = fs::read_dir(&reports_dir).map_err(|e| HarnessError::io(&reports_dir, e))?;
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| HarnessError::io(&reports_dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if name.starts_with("trial_") && name.ends_with(".json") {
            paths.push(path);
        }
    }
    let mut reports = paths.iter().map(|p| read_json::<TrialReport>(p)).collect::<Result<Vec<_>>>()?;
    reports.sort_by_key(|r| r.trial);
    if let Some(bad) = reports.iter().find(|r| r.config_hash != summary.config_hash) {
        return Err(HarnessError::Format {
            path: dir.to_owned(),
            detail: format!("trial {} belongs to config {}, not {}", bad.trial, bad.config_hash, summary.config_hash),
        });
    }
    Ok((summary, reports))
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| HarnessError::Format {
            path: PathBuf::from("<csv>"),
            detail: e.to_string(),
        })?;
    }
    w.into_inner().map_err(|e| HarnessError::Format {
        path: PathBuf::from("<csv>"),
        detail: e.to_string(),
    })
}

/// Writes `trials.csv` + `summary.csv`, or `tables.json`, into `out_dir`.
/// The summary is recomputed from the trial reports. Returns the files written.
pub fn emit_tables(run_dir: &Path, out_dir: &Path, format: TableFormat) -> Result<Vec<PathBuf>> {
    let (stored, reports) = load_run(run_dir)?;
    let summary = summarize(&stored.config, &stored.plan, &reports);
    let rows: Vec<TrialRow> = reports.iter().map(TrialRow::of).collect();
    let summary_row = SummaryRow::of(&summary);
    match format {
        TableFormat::Csv => {
            let trials = out_dir.join("trials.csv");
            let summary_path = out_dir.join("summary.csv");
            write_atomic(&trials, &csv_bytes(&rows)?)?;
            write_atomic(&summary_path, &csv_bytes(&[summary_row])?)?;
            Ok(vec![trials, summary_path])
        }
        TableFormat::Json => {
            let doc = TableDocument {
                schema_version: crate::run::REPORT_SCHEMA,
                config: summary.config,
                summary: summary_row,
                trials: rows,
            };
            let path = out_dir.join("tables.json");
            let mut text = serde_json::to_string_pretty(&doc).expect("tables serialize");
            text.push('\n');
            write_atomic(&path, text.as_bytes())?;
            Ok(vec![path])
        }
    }
}
