//! Declarative report files.
//!
//! * test report: `{"total_tests": 10, "failed_tests": 1, "success_rate_pct": 90.0}`
//!   (the stated rate is optional and only cross-checked)
//! * coverage report: `{"branch_coverage_pct": 62.5}`
//! * mutation report: `{"mutation_score_pct": 40.0}`
//! * `metrics.json`: all of the above plus `total_cost_usd`
//! * `failures.json`: a list of failure records

use std::path::Path;

use rust_decimal::Decimal;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{check_pct, success_rate, FailureRecord, MetricsError, RunMetrics};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsFile {
    pub total_tests: u64,
    pub failed_tests: u64,
    pub branch_coverage_pct: f64,
    pub mutation_score_pct: f64,
    #[serde(default)]
    pub total_cost_usd: Decimal,
}

impl MetricsFile {
    pub fn from_run(run: &RunMetrics) -> Self {
        MetricsFile {
            total_tests: run.total_tests,
            failed_tests: run.failed_tests,
            branch_coverage_pct: run.branch_coverage,
            mutation_score_pct: run.mutation_score,
            total_cost_usd: run.total_cost,
        }
    }

    pub fn into_run(self, model_id: &str, project_id: &str) -> Result<RunMetrics, MetricsError> {
        RunMetrics::new(
            model_id,
            project_id,
            self.total_tests,
            self.failed_tests,
            self.branch_coverage_pct,
            self.mutation_score_pct,
            self.total_cost_usd,
        )
    }
}

#[derive(Deserialize)]
struct TestReport {
    total_tests: u64,
    failed_tests: u64,
    #[serde(default)]
    success_rate_pct: Option<f64>,
}

#[derive(Deserialize)]
struct CoverageReport {
    branch_coverage_pct: f64,
}

#[derive(Deserialize)]
struct MutationReport {
    mutation_score_pct: f64,
}

fn read<T: DeserializeOwned>(label: &str, path: &Path) -> Result<T, MetricsError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| MetricsError::MalformedReport(format!("{label} report {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| MetricsError::MalformedReport(format!("{label} report {}: {e}", path.display())))
}

fn malformed(e: MetricsError) -> MetricsError {
    match e {
        MetricsError::MalformedReport(_) => e,
        other => MetricsError::MalformedReport(other.to_string()),
    }
}

/// Combines the three reports of one run. The success rate is recomputed
/// from the counts; a disagreeing stated rate only produces a warning.
pub fn ingest_run_report(
    model_id: &str,
    project_id: &str,
    test_report: &Path,
    coverage_report: &Path,
    mutation_report: &Path,
) -> Result<(RunMetrics, Vec<String>), MetricsError> {
    let tests: TestReport = read("test", test_report)?;
    let coverage: CoverageReport = read("coverage", coverage_report)?;
    let mutation: MutationReport = read("mutation", mutation_report)?;
    check_pct("branch_coverage", coverage.branch_coverage_pct).map_err(malformed)?;
    check_pct("mutation_score", mutation.mutation_score_pct).map_err(malformed)?;
    let sr = success_rate(tests.total_tests, tests.failed_tests).map_err(malformed)?;

    let mut warnings = Vec::new();
    if let Some(stated) = tests.success_rate_pct {
        if (stated - sr).abs() > 0.05 {
            warnings
                .push(format!("{}: stated success rate {stated} differs from computed {sr:.2}", test_report.display()));
        }
    }
    let run = RunMetrics {
        model_id: model_id.to_string(),
        project_id: project_id.to_string(),
        total_tests: tests.total_tests,
        failed_tests: tests.failed_tests,
        success_rate: sr,
        branch_coverage: coverage.branch_coverage_pct,
        mutation_score: mutation.mutation_score_pct,
        total_cost: Decimal::ZERO,
    };
    Ok((run, warnings))
}

pub fn load_metrics_json(path: &Path, model_id: &str, project_id: &str) -> Result<RunMetrics, MetricsError> {
    let file: MetricsFile = read("metrics", path)?;
    file.into_run(model_id, project_id).map_err(malformed)
}

pub fn load_failures(path: &Path) -> Result<Vec<FailureRecord>, MetricsError> {
    read("failures", path)
}
