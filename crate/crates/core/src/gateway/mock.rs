use serde::{Deserialize, Serialize};

use super::{approx_tokens, fingerprint, ChatProvider, ChatRequest, Completion, GatewayError, ProviderConfig};
use crate::prompt::PromptStage;

/// A canned answer. Exactly one of `fingerprint`, `contains` or `stage`
/// selects the requests it answers; fingerprint rules win over substring
/// rules, which win over stage rules.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MockRule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<String>,
    /// Substring of the last message.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contains: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<PromptStage>,
    pub content: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_tokens: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_tokens: Option<u64>,
    #[serde(default)]
    pub truncated: bool,
}

impl MockRule {
    pub fn for_stage(stage: PromptStage, content: impl Into<String>) -> Self {
        MockRule { stage: Some(stage), content: content.into(), ..MockRule::default() }
    }

    pub fn for_fingerprint(fp: impl Into<String>, content: impl Into<String>) -> Self {
        MockRule { fingerprint: Some(fp.into()), content: content.into(), ..MockRule::default() }
    }

    pub fn containing(text: impl Into<String>, content: impl Into<String>) -> Self {
        MockRule { contains: Some(text.into()), content: content.into(), ..MockRule::default() }
    }
}

#[derive(Debug, Clone, Default)]
pub struct MockProvider {
    rules: Vec<MockRule>,
}

impl MockProvider {
    pub fn new(rules: Vec<MockRule>) -> Self {
        MockProvider { rules }
    }

    pub fn rules(&self) -> &[MockRule] {
        &self.rules
    }

    fn pick(&self, fp: &str, request: &ChatRequest<'_>) -> Option<&MockRule> {
        let last = request.messages.last().map(|m| m.content.as_str()).unwrap_or_default();
        self.rules
            .iter()
            .find(|r| r.fingerprint.as_deref() == Some(fp))
            .or_else(|| self.rules.iter().find(|r| r.contains.as_deref().is_some_and(|t| last.contains(t))))
            .or_else(|| {
                self.rules
                    .iter()
                    .find(|r| r.fingerprint.is_none() && r.contains.is_none() && r.stage == Some(request.stage))
            })
    }
}

impl ChatProvider for MockProvider {
    fn send(&self, config: &ProviderConfig, request: &ChatRequest<'_>) -> Result<Completion, GatewayError> {
        let fp = fingerprint(&config.model_id, request.messages);
        let rule = self.pick(&fp, request).ok_or(GatewayError::NoRuleMatched(fp))?;
        let prompt: String = request.messages.iter().map(|m| m.content.as_str()).collect();
        Ok(Completion {
            content: rule.content.clone(),
            input_tokens: rule.input_tokens.unwrap_or_else(|| approx_tokens(&prompt)),
            output_tokens: rule.output_tokens.unwrap_or_else(|| approx_tokens(&rule.content)),
            latency_ms: 0,
            truncated: rule.truncated,
        })
    }
}
