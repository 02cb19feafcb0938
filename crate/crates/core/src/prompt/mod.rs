//! Assembly of the few-shot, decomposed conversation: a behavior system
//! message, one worked example per step (OpenAPI → TSL, TSL → tests), then
//! the action prompts for a real specification and its TSL segments.

mod model;
mod segment;

use std::path::Path;

pub use model::*;
pub use segment::plan_segments;

use crate::codegen::{framework, Framework};
use crate::openapi::{to_openapi_text, ApiDocument};
use crate::template::{self, TemplateError};
use crate::tsl::{serialize_tsl, TslDocument};

/// Default cap on cases per prompt-4 segment.
pub const DEFAULT_MAX_CASES_PER_SEGMENT: usize = 15;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PromptError {
    #[error("unknown prompt language `{0}` (expected en or pt)")]
    UnknownLanguage(String),
    #[error("unknown framework `{0}`")]
    UnknownFramework(String),
    #[error("invalid example pack: {0}")]
    InvalidExamplePack(String),
    #[error("the TSL document has no cases")]
    EmptyDocument,
    #[error("segment plan cites case `{0}` which the document does not contain")]
    PlanMismatch(String),
    #[error("the OpenAPI document has no endpoints")]
    EmptySpecification,
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("cannot read template {path}: {reason}")]
    TemplateIo { path: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplates {
    pub behavior: String,
    pub example_tsl: String,
    pub example_tests: String,
    pub action_tsl: String,
    pub action_tests: String,
}

const TEMPLATE_FILES: [&str; 5] =
    ["behavior.txt", "example_tsl.txt", "example_tests.txt", "action_tsl.txt", "action_tests.txt"];

impl PromptTemplates {
    pub fn builtin(language: Language) -> PromptTemplates {
        macro_rules! load {
            ($lang:literal) => {
                PromptTemplates {
                    behavior: include_str!(concat!("../../templates/prompts/", $lang, "/behavior.txt")).into(),
                    example_tsl: include_str!(concat!("../../templates/prompts/", $lang, "/example_tsl.txt")).into(),
                    example_tests: include_str!(concat!("../../templates/prompts/", $lang, "/example_tests.txt"))
                        .into(),
                    action_tsl: include_str!(concat!("../../templates/prompts/", $lang, "/action_tsl.txt")).into(),
                    action_tests: include_str!(concat!("../../templates/prompts/", $lang, "/action_tests.txt")).into(),
                }
            };
        }
        match language {
            Language::En => load!("en"),
            Language::Pt => load!("pt"),
        }
    }

    /// Reads `<root>/prompts/<language>/*.txt`, falling back to the built-in
    /// text for files that are absent.
    pub fn load(root: &Path, language: Language) -> Result<PromptTemplates, PromptError> {
        let mut out = PromptTemplates::builtin(language);
        let dir = root.join("prompts").join(language.as_str());
        for (name, slot) in TEMPLATE_FILES.iter().zip(out.slots_mut()) {
            let path = dir.join(name);
            if path.exists() {
                *slot = std::fs::read_to_string(&path)
                    .map_err(|e| PromptError::TemplateIo { path: path.display().to_string(), reason: e.to_string() })?;
            }
        }
        out.check()?;
        Ok(out)
    }

    fn slots_mut(&mut self) -> [&mut String; 5] {
        [
            &mut self.behavior,
            &mut self.example_tsl,
            &mut self.example_tests,
            &mut self.action_tsl,
            &mut self.action_tests,
        ]
    }

    /// Fails on placeholders a template cannot be given, or on a missing
    /// `{{openapi}}`/`{{tsl}}` slot.
    pub fn check(&self) -> Result<(), TemplateError> {
        template::check("behavior", &self.behavior, &["framework"], &[])?;
        template::check("example_tsl", &self.example_tsl, &["openapi", "framework"], &["openapi"])?;
        template::check("example_tests", &self.example_tests, &["tsl", "framework"], &["tsl"])?;
        template::check("action_tsl", &self.action_tsl, &["openapi", "framework"], &["openapi"])?;
        template::check("action_tests", &self.action_tests, &["tsl", "framework"], &["tsl"])?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptConfig {
    pub language: Language,
    pub framework_key: String,
}

impl PromptConfig {
    pub fn new(language: &str, framework_key: &str) -> Result<Self, PromptError> {
        Ok(PromptConfig { language: language.parse()?, framework_key: framework_key.to_string() })
    }
}

/// What the conversation ends with.
#[derive(Debug, Clone, Copy)]
pub enum Action<'a> {
    GenerateTsl(&'a ApiDocument),
    GenerateTests { doc: &'a TslDocument, plan: &'a SegmentPlan },
}

impl Action<'_> {
    pub fn stage(&self) -> PromptStage {
        match self {
            Action::GenerateTsl(_) => PromptStage::ActionGenerateTsl,
            Action::GenerateTests { .. } => PromptStage::ActionGenerateTests,
        }
    }
}

/// Message builders bound to one template set and target framework.
#[derive(Debug, Clone)]
pub struct Prompter {
    templates: PromptTemplates,
    framework: &'static Framework,
}

impl Prompter {
    pub fn new(config: &PromptConfig) -> Result<Prompter, PromptError> {
        Prompter::with_templates(PromptTemplates::builtin(config.language), &config.framework_key)
    }

    pub fn with_templates(templates: PromptTemplates, framework_key: &str) -> Result<Prompter, PromptError> {
        templates.check()?;
        let framework =
            framework(framework_key).ok_or_else(|| PromptError::UnknownFramework(framework_key.to_string()))?;
        Ok(Prompter { templates, framework })
    }

    pub fn framework(&self) -> &'static Framework {
        self.framework
    }

    fn fill(&self, label: &str, text: &str, slot: Option<(&str, &str)>) -> Result<String, PromptError> {
        let mut vars = vec![("framework", self.framework.display_name)];
        vars.extend(slot);
        Ok(template::render(label, text, &vars)?)
    }

    pub fn build_behavior_prompt(&self) -> Result<ChatMessage, PromptError> {
        Ok(ChatMessage::system(self.fill("behavior", &self.templates.behavior, None)?))
    }

    /// user(prompt 1), assistant(TSL), user(prompt 2), assistant(tests).
    pub fn build_example_messages(&self, pack: &ExamplePack) -> Result<Vec<ChatMessage>, PromptError> {
        pack.check()?;
        Ok(vec![
            ChatMessage::user(self.fill(
                "example_tsl",
                &self.templates.example_tsl,
                Some(("openapi", pack.example_openapi.trim_end())),
            )?),
            ChatMessage::assistant(pack.example_tsl.clone()),
            ChatMessage::user(self.fill(
                "example_tests",
                &self.templates.example_tests,
                Some(("tsl", pack.example_tsl.trim_end())),
            )?),
            ChatMessage::assistant(pack.example_tests.clone()),
        ])
    }

    pub fn build_action_tsl_prompt(&self, api_slice: &ApiDocument) -> Result<ChatMessage, PromptError> {
        if api_slice.endpoints.is_empty() {
            return Err(PromptError::EmptySpecification);
        }
        let spec = to_openapi_text(api_slice);
        Ok(ChatMessage::user(self.fill(
            "action_tsl",
            &self.templates.action_tsl,
            Some(("openapi", spec.trim_end())),
        )?))
    }

    /// One user message per segment, each embedding only that segment's cases.
    pub fn build_action_tests_prompts(
        &self,
        doc: &TslDocument,
        plan: &SegmentPlan,
    ) -> Result<Vec<ChatMessage>, PromptError> {
        if let Some(id) = plan.case_ids().find(|id| doc.case(id).is_none()) {
            return Err(PromptError::PlanMismatch(id.to_string()));
        }
        plan.segments
            .iter()
            .map(|segment| {
                let subset = doc.subset(segment.case_ids.iter().map(String::as_str));
                let tsl = serialize_tsl(&subset);
                Ok(ChatMessage::user(self.fill(
                    "action_tests",
                    &self.templates.action_tests,
                    Some(("tsl", tsl.trim_end())),
                )?))
            })
            .collect()
    }

    pub fn assemble_conversation(
        &self,
        pack: &ExamplePack,
        action: Action<'_>,
    ) -> Result<ConversationScript, PromptError> {
        let mut messages = vec![self.build_behavior_prompt()?];
        messages.extend(self.build_example_messages(pack)?);
        let mut stage_labels = vec![
            PromptStage::Behavior,
            PromptStage::ExampleOpenApiToTsl,
            PromptStage::ExampleOpenApiToTsl,
            PromptStage::ExampleTslToTests,
            PromptStage::ExampleTslToTests,
        ];
        let actions = match action {
            Action::GenerateTsl(api) => vec![self.build_action_tsl_prompt(api)?],
            Action::GenerateTests { doc, plan } => self.build_action_tests_prompts(doc, plan)?,
        };
        stage_labels.extend(std::iter::repeat_n(action.stage(), actions.len()));
        messages.extend(actions);
        Ok(ConversationScript { messages, stage_labels })
    }
}
