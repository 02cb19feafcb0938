//! Scoring and ranking of generating models from test, coverage and
//! mutation results.

mod ingest;
mod report;

use std::fmt;

use indexmap::IndexMap;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

pub use ingest::{ingest_run_report, load_failures, load_metrics_json, MetricsFile};
pub use report::{render_rank_csv, render_rank_markdown, render_score_csv, render_score_markdown, Locale};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("no tests were run")]
    ZeroTests,
    #[error("failed tests ({failed}) exceed total tests ({total})")]
    FailedExceedsTotal { total: u64, failed: u64 },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("{name} = {value} is outside [0, 100]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("nothing to aggregate")]
    EmptyInput,
    #[error("malformed report: {0}")]
    MalformedReport(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub model_id: String,
    pub project_id: String,
    pub total_tests: u64,
    pub failed_tests: u64,
    pub success_rate: f64,
    pub branch_coverage: f64,
    pub mutation_score: f64,
    pub total_cost: Decimal,
}

impl RunMetrics {
    pub fn new(
        model_id: &str,
        project_id: &str,
        total_tests: u64,
        failed_tests: u64,
        branch_coverage: f64,
        mutation_score: f64,
        total_cost: Decimal,
    ) -> Result<RunMetrics, MetricsError> {
        check_pct("branch_coverage", branch_coverage)?;
        check_pct("mutation_score", mutation_score)?;
        Ok(RunMetrics {
            model_id: model_id.to_string(),
            project_id: project_id.to_string(),
            total_tests,
            failed_tests,
            success_rate: success_rate(total_tests, failed_tests)?,
            branch_coverage,
            mutation_score,
            total_cost,
        })
    }
}

fn check_pct(name: &'static str, value: f64) -> Result<(), MetricsError> {
    if value.is_finite() && (0.0..=100.0).contains(&value) {
        Ok(())
    } else {
        Err(MetricsError::OutOfRange { name, value })
    }
}

fn check_counts(total: u64, failed: u64) -> Result<(), MetricsError> {
    if total == 0 {
        return Err(MetricsError::ZeroTests);
    }
    if failed > total {
        return Err(MetricsError::FailedExceedsTotal { total, failed });
    }
    Ok(())
}

/// Percentage of passing tests.
pub fn success_rate(total: u64, failed: u64) -> Result<f64, MetricsError> {
    check_counts(total, failed)?;
    Ok(100.0 * (total - failed) as f64 / total as f64)
}

/// Percentage of failing tests (unrounded; see [`round_half_up`]).
pub fn failed_pct(total: u64, failed: u64) -> Result<f64, MetricsError> {
    check_counts(total, failed)?;
    Ok(100.0 * failed as f64 / total as f64)
}

/// Rounds half away from zero at `decimals` places, tolerant of binary
/// representation error (`63.35` rounds to `63.4`).
pub fn round_half_up(value: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    let scaled = value.abs() * scale;
    let nudged = scaled + scaled.max(1.0) * 1e-12;
    value.signum() * (nudged + 0.5).floor() / scale
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    #[serde(rename = "sr")]
    pub w_sr: f64,
    #[serde(rename = "c")]
    pub w_c: f64,
    #[serde(rename = "m")]
    pub w_m: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { w_sr: 1.0 / 3.0, w_c: 1.0 / 3.0, w_m: 1.0 / 3.0 }
    }
}

impl Weights {
    pub fn new(w_sr: f64, w_c: f64, w_m: f64) -> Result<Weights, MetricsError> {
        let w = Weights { w_sr, w_c, w_m };
        w.validate()?;
        Ok(w)
    }

    /// Scales non-negative raw weights to sum to one.
    pub fn normalized(w_sr: f64, w_c: f64, w_m: f64) -> Result<Weights, MetricsError> {
        let sum = w_sr + w_c + w_m;
        if !(sum.is_finite() && sum > 0.0) || [w_sr, w_c, w_m].iter().any(|w| *w < 0.0) {
            return Err(MetricsError::InvalidWeights(format!("cannot normalize ({w_sr}, {w_c}, {w_m})")));
        }
        Weights::new(w_sr / sum, w_c / sum, w_m / sum)
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        let ws = [self.w_sr, self.w_c, self.w_m];
        if ws.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(MetricsError::InvalidWeights("weights must be finite and non-negative".into()));
        }
        let sum: f64 = ws.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(MetricsError::InvalidWeights(format!("weights sum to {sum}, not 1")));
        }
        Ok(())
    }
}

/// Weighted sum of success rate, coverage and mutation score.
pub fn calculated_score(sr: f64, c: f64, m: f64, weights: &Weights) -> Result<f64, MetricsError> {
    weights.validate()?;
    check_pct("success_rate", sr)?;
    check_pct("branch_coverage", c)?;
    check_pct("mutation_score", m)?;
    Ok(weights.w_sr * sr + weights.w_c * c + weights.w_m * m)
}

/// Per-model averages over projects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub model_id: String,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "SR")]
    pub sr: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "M")]
    pub m: f64,
    /// Average test count per project.
    #[serde(rename = "T")]
    pub t: f64,
    /// Total cost in USD.
    #[serde(rename = "TC")]
    pub tc: Decimal,
}

/// Unweighted mean of SR, C, M and T across one model's projects, summed
/// cost, and S recomputed from the averaged metrics.
pub fn aggregate_projects(runs: &[RunMetrics], weights: &Weights) -> Result<ScoreRow, MetricsError> {
    let first = runs.first().ok_or(MetricsError::EmptyInput)?;
    if let Some(other) = runs.iter().find(|r| r.model_id != first.model_id) {
        return Err(MetricsError::MalformedReport(format!(
            "runs mix models `{}` and `{}`",
            first.model_id, other.model_id
        )));
    }
    let n = runs.len() as f64;
    let mean = |f: fn(&RunMetrics) -> f64| runs.iter().map(f).sum::<f64>() / n;
    let sr = mean(|r| r.success_rate);
    let c = mean(|r| r.branch_coverage);
    let m = mean(|r| r.mutation_score);
    Ok(ScoreRow {
        model_id: first.model_id.clone(),
        s: calculated_score(sr, c, m, weights)?,
        sr,
        c,
        m,
        t: mean(|r| r.total_tests as f64),
        tc: runs.iter().map(|r| r.total_cost).sum(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    S,
    SR,
    C,
    M,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::S, Metric::SR, Metric::C, Metric::M];

    pub fn of(self, row: &ScoreRow) -> f64 {
        match self {
            Metric::S => row.s,
            Metric::SR => row.sr,
            Metric::C => row.c,
            Metric::M => row.m,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::S => "S",
            Metric::SR => "SR",
            Metric::C => "C",
            Metric::M => "M",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankEntry {
    pub model_id: String,
    pub value: Decimal,
    /// `None` for the leader, shown as `--`.
    pub delta: Option<Decimal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingTable {
    pub columns: IndexMap<Metric, Vec<RankEntry>>,
}

impl RankingTable {
    pub fn column(&self, metric: Metric) -> &[RankEntry] {
        self.columns.get(&metric).map(Vec::as_slice).unwrap_or_default()
    }
}

/// The shortest decimal that reads back as `value`, so `63.4` stays `63.4`
/// and differences between ranked values are exact.
pub fn to_decimal(value: f64) -> Decimal {
    value.to_string().parse::<Decimal>().ok().or_else(|| Decimal::from_f64_retain(value)).unwrap_or_default()
}

/// Per metric: nonincreasing by value, ties by model id, deltas from the
/// leader.
pub fn rank_models(rows: &[ScoreRow]) -> RankingTable {
    let mut columns = IndexMap::new();
    for metric in Metric::ALL {
        let mut sorted: Vec<(Decimal, &str)> =
            rows.iter().map(|r| (to_decimal(metric.of(r)), r.model_id.as_str())).collect();
        sorted.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        let leader = sorted.first().map(|(v, _)| *v).unwrap_or_default();
        let entries = sorted
            .iter()
            .enumerate()
            .map(|(i, (value, model))| RankEntry {
                model_id: model.to_string(),
                value: *value,
                delta: (i > 0).then(|| *value - leader),
            })
            .collect();
        columns.insert(metric, entries);
    }
    RankingTable { columns }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FailureCategory {
    PropertyLength,
    Misinterpretation,
    Authentication,
    PropertyRequirement,
    RequiredCharacters,
    JsonDeserialization,
}

impl FailureCategory {
    pub const ALL: [FailureCategory; 6] = [
        FailureCategory::PropertyLength,
        FailureCategory::Misinterpretation,
        FailureCategory::Authentication,
        FailureCategory::PropertyRequirement,
        FailureCategory::RequiredCharacters,
        FailureCategory::JsonDeserialization,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub model_id: String,
    pub project_id: String,
    pub case_id: String,
    pub category: FailureCategory,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureTaxonomy {
    /// Every category, including zero counts, in declaration order.
    pub counts: IndexMap<FailureCategory, u64>,
}

impl FailureTaxonomy {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn count(&self, category: FailureCategory) -> u64 {
        self.counts.get(&category).copied().unwrap_or(0)
    }
}

pub fn tally_failures(records: &[FailureRecord]) -> FailureTaxonomy {
    let mut counts: IndexMap<FailureCategory, u64> = FailureCategory::ALL.iter().map(|c| (*c, 0)).collect();
    for r in records {
        *counts.entry(r.category).or_default() += 1;
    }
    FailureTaxonomy { counts }
}
