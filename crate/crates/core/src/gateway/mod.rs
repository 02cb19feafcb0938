//! Chat-completion providers behind one contract: role-tagged messages in,
//! text plus token usage out.
//!
//! Offline work goes through [`MockProvider`] and [`ReplayProvider`]; live
//! calls go through [`OpenAiCompatible`] over an injectable [`HttpTransport`].

mod cassette;
mod ledger;
mod mock;
mod openai;
mod retry;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use cassette::{Cassette, CassetteEntry, RecordingProvider, ReplayProvider, Usage};
pub use ledger::{format_usd, CostLedger, LedgerEntry};
pub use mock::{MockProvider, MockRule};
pub use openai::{FailingTransport, HttpResponse, HttpTransport, OpenAiCompatible, ReqwestTransport, TransportError};
pub use retry::{no_sleep, thread_sleep, Backoff, Sleeper};

use crate::prompt::{ChatMessage, PromptStage};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GatewayError {
    #[error("authentication failed: {0}")]
    AuthError(String),
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("provider error: {0}")]
    ProviderError(String),
    #[error("request timed out after {attempts} attempts")]
    Timeout { attempts: u32 },
    #[error("no cassette entry for fingerprint {0}")]
    CassetteMiss(String),
    #[error("no mock rule matches request {0}")]
    NoRuleMatched(String),
    #[error("I/O error: {0}")]
    IoError(String),
    #[error("invalid provider config: {0}")]
    InvalidConfig(String),
}

fn default_temperature() -> f64 {
    1.0
}

fn default_timeout() -> u64 {
    120
}

fn default_retries() -> u32 {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub provider_key: String,
    pub model_id: String,
    #[serde(default)]
    pub endpoint_url: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub max_output_tokens: Option<u32>,
    #[serde(default)]
    pub price_in_per_million: Decimal,
    #[serde(default)]
    pub price_out_per_million: Decimal,
    /// Seconds.
    #[serde(default = "default_timeout", rename = "timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
}

impl ProviderConfig {
    pub fn new(provider_key: &str, model_id: &str) -> Self {
        ProviderConfig {
            provider_key: provider_key.to_string(),
            model_id: model_id.to_string(),
            endpoint_url: String::new(),
            temperature: default_temperature(),
            seed: None,
            max_output_tokens: None,
            price_in_per_million: Decimal::ZERO,
            price_out_per_million: Decimal::ZERO,
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
        }
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        let bad = |why: &str| Err(GatewayError::InvalidConfig(format!("{}: {why}", self.model_id)));
        if self.model_id.trim().is_empty() {
            return bad("model_id is empty");
        }
        if self.price_in_per_million.is_sign_negative() || self.price_out_per_million.is_sign_negative() {
            return bad("prices must be non-negative");
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return bad("temperature must be a non-negative number");
        }
        Ok(())
    }

    /// `RESTTSL_<PROVIDER_KEY>_API_KEY`, with the key upper-cased and other
    /// characters folded to `_`.
    pub fn api_key_env(&self) -> String {
        let key: String = self
            .provider_key
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_uppercase() } else { '_' })
            .collect();
        format!("RESTTSL_{key}_API_KEY")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub content: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub latency_ms: u64,
    pub truncated: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ChatRequest<'a> {
    pub stage: PromptStage,
    pub messages: &'a [ChatMessage],
}

pub trait ChatProvider: Send + Sync {
    fn send(&self, config: &ProviderConfig, request: &ChatRequest<'_>) -> Result<Completion, GatewayError>;
}

/// sha256 hex over the canonical JSON of `(model_id, messages)`.
pub fn fingerprint(model_id: &str, messages: &[ChatMessage]) -> String {
    let canonical = serde_json::json!({ "model_id": model_id, "messages": messages });
    let bytes = serde_json::to_vec(&canonical).expect("messages serialize");
    hex::encode(Sha256::digest(bytes))
}

/// Exact USD cost of a call: tokens times per-million prices.
pub fn estimate_cost(input_tokens: u64, output_tokens: u64, config: &ProviderConfig) -> Decimal {
    let million = Decimal::from(1_000_000u32);
    Decimal::from(input_tokens) * config.price_in_per_million / million
        + Decimal::from(output_tokens) * config.price_out_per_million / million
}

/// Rough token count used when a provider reports no usage.
pub(crate) fn approx_tokens(text: &str) -> u64 {
    (text.chars().count() as u64).div_ceil(4)
}

#[cfg(test)]
mod tests;
