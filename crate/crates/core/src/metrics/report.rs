use std::str::FromStr;

use rust_decimal::{Decimal, RoundingStrategy};
use serde::{Deserialize, Serialize};

use super::{round_half_up, Metric, RankingTable, ScoreRow};

/// Number formatting for emitted reports. `Pt` writes decimal commas and
/// uses `;` as the CSV separator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Locale {
    #[default]
    En,
    Pt,
}

impl FromStr for Locale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "en" => Ok(Locale::En),
            "pt" | "pt-br" => Ok(Locale::Pt),
            _ => Err(format!("unknown locale `{s}` (expected en or pt)")),
        }
    }
}

impl Locale {
    fn localize(self, s: String) -> String {
        match self {
            Locale::En => s,
            Locale::Pt => s.replace('.', ","),
        }
    }

    fn separator(self) -> char {
        match self {
            Locale::En => ',',
            Locale::Pt => ';',
        }
    }

    pub fn number(self, value: f64, decimals: u32) -> String {
        let v = round_half_up(value, decimals) + 0.0;
        let v = if v == 0.0 { 0.0 } else { v };
        self.localize(format!("{v:.prec$}", prec = decimals as usize))
    }

    /// Half away from zero at `decimals` places.
    pub fn decimal(self, value: Decimal, decimals: u32) -> String {
        let v = value.round_dp_with_strategy(decimals, RoundingStrategy::MidpointAwayFromZero);
        let v = if v.is_zero() { Decimal::ZERO } else { v };
        self.localize(format!("{v:.prec$}", prec = decimals as usize))
    }

    pub fn money(self, value: Decimal) -> String {
        self.decimal(value, 2)
    }

    pub fn delta(self, delta: Option<Decimal>) -> String {
        match delta {
            None => "--".into(),
            Some(d) => self.decimal(d, 1),
        }
    }
}

fn by_score(rows: &[ScoreRow]) -> Vec<&ScoreRow> {
    let mut sorted: Vec<&ScoreRow> = rows.iter().collect();
    sorted.sort_by(|a, b| b.s.total_cmp(&a.s).then_with(|| a.model_id.cmp(&b.model_id)));
    sorted
}

/// Averages per model, highest score first.
pub fn render_score_markdown(rows: &[ScoreRow], locale: Locale) -> String {
    let mut out = String::from("| Model | S | SR | C | M | T | TC |\n|---|---:|---:|---:|---:|---:|---:|\n");
    for r in by_score(rows) {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} |\n",
            r.model_id,
            locale.number(r.s, 1),
            locale.number(r.sr, 1),
            locale.number(r.c, 1),
            locale.number(r.m, 1),
            locale.number(r.t, 1),
            locale.money(r.tc)
        ));
    }
    out
}

pub fn render_score_csv(rows: &[ScoreRow], locale: Locale) -> String {
    let sep = locale.separator();
    let mut out = ["model", "S", "SR", "C", "M", "T", "TC"].join(&sep.to_string()) + "\n";
    for r in by_score(rows) {
        let cells = [
            r.model_id.clone(),
            locale.number(r.s, 1),
            locale.number(r.sr, 1),
            locale.number(r.c, 1),
            locale.number(r.m, 1),
            locale.number(r.t, 1),
            locale.money(r.tc),
        ];
        out.push_str(&cells.join(&sep.to_string()));
        out.push('\n');
    }
    out
}

/// One row per position; each metric contributes a model and a delta column.
pub fn render_rank_markdown(table: &RankingTable, locale: Locale) -> String {
    let mut out = String::from("| Position |");
    let mut rule = String::from("|---:|");
    for metric in Metric::ALL {
        out.push_str(&format!(" {metric} | Δ{metric} |"));
        rule.push_str("---|---:|");
    }
    out.push('\n');
    out.push_str(&rule);
    out.push('\n');
    let rows = Metric::ALL.iter().map(|m| table.column(*m).len()).max().unwrap_or(0);
    for i in 0..rows {
        out.push_str(&format!("| {} |", i + 1));
        for metric in Metric::ALL {
            match table.column(metric).get(i) {
                Some(e) => out.push_str(&format!(" {} | {} |", e.model_id, locale.delta(e.delta))),
                None => out.push_str("  |  |"),
            }
        }
        out.push('\n');
    }
    out
}

pub fn render_rank_csv(table: &RankingTable, locale: Locale) -> String {
    let sep = locale.separator().to_string();
    let mut out = ["position", "metric", "model", "value", "delta"].join(&sep) + "\n";
    for metric in Metric::ALL {
        for (i, e) in table.column(metric).iter().enumerate() {
            let cells = [
                (i + 1).to_string(),
                metric.to_string(),
                e.model_id.clone(),
                locale.decimal(e.value, 1),
                locale.delta(e.delta),
            ];
            out.push_str(&cells.join(&sep));
            out.push('\n');
        }
    }
    out
}
