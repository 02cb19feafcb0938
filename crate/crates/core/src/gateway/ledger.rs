use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rust_decimal::{Decimal, RoundingStrategy};
use serde::{Deserialize, Serialize};

use super::{estimate_cost, Completion, GatewayError, ProviderConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub model_id: String,
    pub project_id: String,
    pub stage: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
    /// Exact USD, serialized as a decimal string.
    pub cost: Decimal,
}

/// Token usage and cost per call, summed exactly.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostLedger {
    pub entries: Vec<LedgerEntry>,
}

impl CostLedger {
    pub fn entry(config: &ProviderConfig, project_id: &str, stage: &str, completion: &Completion) -> LedgerEntry {
        LedgerEntry {
            model_id: config.model_id.clone(),
            project_id: project_id.to_string(),
            stage: stage.to_string(),
            input_tokens: completion.input_tokens,
            output_tokens: completion.output_tokens,
            cost: estimate_cost(completion.input_tokens, completion.output_tokens, config),
        }
    }

    pub fn push(&mut self, entry: LedgerEntry) {
        self.entries.push(entry);
    }

    pub fn total(&self) -> Decimal {
        self.entries.iter().map(|e| e.cost).sum()
    }

    /// Totals keyed by `(model_id, project_id)`.
    pub fn totals(&self) -> BTreeMap<(String, String), Decimal> {
        let mut out = BTreeMap::new();
        for e in &self.entries {
            *out.entry((e.model_id.clone(), e.project_id.clone())).or_insert(Decimal::ZERO) += e.cost;
        }
        out
    }

    pub fn total_for(&self, model_id: &str, project_id: &str) -> Decimal {
        self.entries.iter().filter(|e| e.model_id == model_id && e.project_id == project_id).map(|e| e.cost).sum()
    }

    pub fn from_jsonl(text: &str) -> Result<CostLedger, String> {
        let entries = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(n, l)| serde_json::from_str(l).map_err(|e| format!("line {}: {e}", n + 1)))
            .collect::<Result<_, _>>()?;
        Ok(CostLedger { entries })
    }

    pub fn load(path: &Path) -> Result<CostLedger, GatewayError> {
        let text = fs::read_to_string(path).map_err(|e| GatewayError::IoError(format!("{}: {e}", path.display())))?;
        CostLedger::from_jsonl(&text).map_err(|e| GatewayError::IoError(format!("{}: {e}", path.display())))
    }

    /// Appends one JSON line; each call is a single `write_all` on an
    /// append-mode handle.
    pub fn append(path: &Path, entry: &LedgerEntry) -> Result<(), GatewayError> {
        let err = |e: std::io::Error| GatewayError::IoError(format!("{}: {e}", path.display()));
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(err)?;
        }
        let mut file = fs::OpenOptions::new().create(true).append(true).open(path).map_err(err)?;
        let line = serde_json::to_string(entry).expect("entries serialize") + "\n";
        file.write_all(line.as_bytes()).map_err(err)
    }
}

/// `$` and four decimals, half away from zero.
pub fn format_usd(amount: Decimal) -> String {
    let rounded = amount.round_dp_with_strategy(4, RoundingStrategy::MidpointAwayFromZero);
    format!("${rounded:.4}")
}
