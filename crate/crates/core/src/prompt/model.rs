use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PromptStage {
    Behavior,
    ExampleOpenApiToTsl,
    ExampleTslToTests,
    ActionGenerateTsl,
    ActionGenerateTests,
}

impl PromptStage {
    pub fn as_str(self) -> &'static str {
        match self {
            PromptStage::Behavior => "Behavior",
            PromptStage::ExampleOpenApiToTsl => "ExampleOpenApiToTsl",
            PromptStage::ExampleTslToTests => "ExampleTslToTests",
            PromptStage::ActionGenerateTsl => "ActionGenerateTsl",
            PromptStage::ActionGenerateTests => "ActionGenerateTests",
        }
    }
}

impl fmt::Display for PromptStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage { role: Role::Assistant, content: content.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Pt,
}

impl Language {
    pub fn as_str(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Pt => "pt",
        }
    }
}

impl FromStr for Language {
    type Err = super::PromptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "en" => Ok(Language::En),
            "pt" | "pt-br" => Ok(Language::Pt),
            _ => Err(super::PromptError::UnknownLanguage(s.to_string())),
        }
    }
}

/// One worked OpenAPI → TSL → tests example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExamplePack {
    pub example_openapi: String,
    pub example_tsl: String,
    pub example_tests: String,
    pub target_framework_key: String,
}

impl ExamplePack {
    /// The xUnit (.NET) pack bundled with the library.
    pub fn builtin() -> ExamplePack {
        ExamplePack {
            example_openapi: include_str!("../../templates/examples/xunit-dotnet/openapi.yaml").into(),
            example_tsl: include_str!("../../templates/examples/xunit-dotnet/cases.tsl.yaml").into(),
            example_tests: include_str!("../../templates/examples/xunit-dotnet/tests.cs").into(),
            target_framework_key: "xunit-dotnet".into(),
        }
    }

    pub fn check(&self) -> Result<(), super::PromptError> {
        let invalid = |why: String| Err(super::PromptError::InvalidExamplePack(why));
        for (label, text) in [
            ("example_openapi", &self.example_openapi),
            ("example_tsl", &self.example_tsl),
            ("example_tests", &self.example_tests),
        ] {
            if text.trim().is_empty() {
                return invalid(format!("{label} is empty"));
            }
        }
        if let Err(e) = crate::tsl::parse_tsl(&self.example_tsl) {
            return invalid(format!("example_tsl does not parse: {e}"));
        }
        Ok(())
    }
}

/// An ordered conversation plus the stage each message belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversationScript {
    pub messages: Vec<ChatMessage>,
    pub stage_labels: Vec<PromptStage>,
}

/// Number of messages before the first action message.
pub const PREFIX_LEN: usize = 5;

impl ConversationScript {
    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    /// Indices of the action (user) messages.
    pub fn action_indices(&self) -> Vec<usize> {
        self.stage_labels
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, PromptStage::ActionGenerateTsl | PromptStage::ActionGenerateTests))
            .map(|(i, _)| i)
            .collect()
    }

    /// The messages sent for the `k`-th action: the behavior and example
    /// prefix followed by that single action message.
    pub fn request(&self, k: usize) -> Option<Vec<ChatMessage>> {
        let index = *self.action_indices().get(k)?;
        let mut out: Vec<ChatMessage> = self.messages[..PREFIX_LEN.min(index)].to_vec();
        out.push(self.messages[index].clone());
        Some(out)
    }

    /// Human-readable dump used for golden files and the prompts/ directory.
    pub fn transcript(&self) -> String {
        let mut out = String::new();
        for (message, stage) in self.messages.iter().zip(&self.stage_labels) {
            out.push_str(&format!("=== {} [{}] ===\n", message.role.as_str(), stage));
            out.push_str(&message.content);
            if !message.content.ends_with('\n') {
                out.push('\n');
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub group: String,
    pub case_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SegmentPlan {
    pub segments: Vec<Segment>,
}

impl SegmentPlan {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn case_ids(&self) -> impl Iterator<Item = &str> {
        self.segments.iter().flat_map(|s| s.case_ids.iter().map(String::as_str))
    }
}
