//! The pipeline configuration: one YAML document, paths relative to it.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use resttsl_core::gateway::{MockRule, ProviderConfig};
use resttsl_core::metrics::Weights;
use resttsl_core::prompt::{
    ExamplePack, PromptConfig, PromptStage, PromptTemplates, Prompter, DEFAULT_MAX_CASES_PER_SEGMENT,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Live,
    Record,
    Replay,
    #[default]
    Mock,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Live => "live",
            Mode::Record => "record",
            Mode::Replay => "replay",
            Mode::Mock => "mock",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "live" => Ok(Mode::Live),
            "record" => Ok(Mode::Record),
            "replay" => Ok(Mode::Replay),
            "mock" => Ok(Mode::Mock),
            _ => Err(format!("unknown mode `{s}` (expected live, record, replay or mock)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Project {
    pub id: String,
    pub openapi: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExamplePackPaths {
    pub openapi: PathBuf,
    pub tsl: PathBuf,
    pub tests: PathBuf,
    #[serde(default = "default_framework")]
    pub framework: String,
}

/// A mock rule whose answer may live in a file.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockRuleSpec {
    #[serde(default)]
    pub fingerprint: Option<String>,
    #[serde(default)]
    pub contains: Option<String>,
    #[serde(default)]
    pub stage: Option<PromptStage>,
    #[serde(default)]
    pub content: Option<String>,
    #[serde(default)]
    pub content_file: Option<PathBuf>,
    #[serde(default)]
    pub input_tokens: Option<u64>,
    #[serde(default)]
    pub output_tokens: Option<u64>,
    #[serde(default)]
    pub truncated: bool,
}

fn default_language() -> String {
    "en".into()
}

fn default_framework() -> String {
    "xunit-dotnet".into()
}

fn default_cap() -> usize {
    DEFAULT_MAX_CASES_PER_SEGMENT
}

fn default_run_root() -> PathBuf {
    PathBuf::from("runs")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawWeights {
    pub sr: f64,
    pub c: f64,
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub models: Vec<ProviderConfig>,
    pub projects: Vec<Project>,
    #[serde(default)]
    pub example_pack: Option<ExamplePackPaths>,
    #[serde(default)]
    pub templates_dir: Option<PathBuf>,
    #[serde(default = "default_language")]
    pub language: String,
    #[serde(default = "default_framework")]
    pub framework: String,
    /// Raw weights, normalized to sum to one when loaded.
    #[serde(default)]
    pub weights: Option<RawWeights>,
    #[serde(default = "default_cap")]
    pub max_cases_per_segment: usize,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_run_root")]
    pub run_root: PathBuf,
    #[serde(default)]
    pub mock: Vec<MockRuleSpec>,
    /// Directory the relative paths above are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<PipelineConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        PipelineConfig::from_yaml(&text, &base)
    }

    pub fn from_yaml(text: &str, base_dir: &Path) -> Result<PipelineConfig, CliError> {
        let mut config: PipelineConfig = serde_yaml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.base_dir = base_dir.to_path_buf();
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.models.is_empty() {
            return Err(CliError::Config("at least one model is required".into()));
        }
        if self.projects.is_empty() {
            return Err(CliError::Config("at least one project is required".into()));
        }
        for model in &self.models {
            model.validate()?;
        }
        let mut seen = std::collections::HashSet::new();
        for model in &self.models {
            let dir = slug(&model.model_id);
            if dir == crate::layout::DERIVED_DIR || dir == crate::layout::REPORTS_DIR {
                return Err(CliError::Config(format!("model id `{}` is reserved", model.model_id)));
            }
            if !seen.insert(dir) {
                return Err(CliError::Config(format!("model `{}` is listed twice", model.model_id)));
            }
        }
        seen.clear();
        for project in &self.projects {
            if project.id.trim().is_empty() || !seen.insert(slug(&project.id)) {
                return Err(CliError::Config(format!("project id `{}` is empty or repeated", project.id)));
            }
        }
        if self.max_cases_per_segment == 0 {
            return Err(CliError::Config("max_cases_per_segment must be positive".into()));
        }
        self.weights()?;
        for (i, rule) in self.mock.iter().enumerate() {
            let selectors = [rule.fingerprint.is_some(), rule.contains.is_some(), rule.stage.is_some()];
            if selectors.iter().filter(|s| **s).count() != 1 {
                return Err(CliError::Config(format!(
                    "mock rule {i} needs exactly one of fingerprint, contains or stage"
                )));
            }
            if rule.content.is_some() == rule.content_file.is_some() {
                return Err(CliError::Config(format!("mock rule {i} needs exactly one of content or content_file")));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn run_root(&self) -> PathBuf {
        self.resolve(&self.run_root)
    }

    pub fn weights(&self) -> Result<Weights, CliError> {
        match self.weights {
            None => Ok(Weights::default()),
            Some(w) => Ok(Weights::normalized(w.sr, w.c, w.m)?),
        }
    }

    pub fn model(&self, id: &str) -> Option<&ProviderConfig> {
        self.models.iter().find(|m| m.model_id == id)
    }

    pub fn project(&self, id: &str) -> Option<&Project> {
        self.projects.iter().find(|p| p.id == id)
    }

    pub fn prompter(&self) -> Result<Prompter, CliError> {
        let prompt_config = PromptConfig::new(&self.language, &self.framework)?;
        let prompter = match &self.templates_dir {
            None => Prompter::new(&prompt_config)?,
            Some(dir) => {
                let templates = PromptTemplates::load(&self.resolve(dir), prompt_config.language)?;
                Prompter::with_templates(templates, &self.framework)?
            }
        };
        Ok(prompter)
    }

    pub fn example_pack(&self) -> Result<ExamplePack, CliError> {
        let Some(paths) = &self.example_pack else {
            return Ok(ExamplePack::builtin());
        };
        let read = |p: &Path| {
            let p = self.resolve(p);
            std::fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))
        };
        let pack = ExamplePack {
            example_openapi: read(&paths.openapi)?,
            example_tsl: read(&paths.tsl)?,
            example_tests: read(&paths.tests)?,
            target_framework_key: paths.framework.clone(),
        };
        pack.check()?;
        Ok(pack)
    }

    pub fn mock_rules(&self) -> Result<Vec<MockRule>, CliError> {
        self.mock
            .iter()
            .map(|spec| {
                let content = match (&spec.content, &spec.content_file) {
                    (Some(text), _) => text.clone(),
                    (None, Some(file)) => {
                        let p = self.resolve(file);
                        std::fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?
                    }
                    (None, None) => unreachable!("validated"),
                };
                Ok(MockRule {
                    fingerprint: spec.fingerprint.clone(),
                    contains: spec.contains.clone(),
                    stage: spec.stage,
                    content,
                    input_tokens: spec.input_tokens,
                    output_tokens: spec.output_tokens,
                    truncated: spec.truncated,
                })
            })
            .collect()
    }
}

/// Directory name for a model or project id.
pub fn slug(id: &str) -> String {
    let s: String =
        id.chars().map(|c| if c.is_alphanumeric() || matches!(c, '.' | '-' | '_') { c } else { '_' }).collect();
    match s.as_str() {
        "" | "." | ".." => format!("_{s}"),
        _ => s,
    }
}
