//! From completions (or straight from TSL) to assembled test suites.

mod extract;
mod framework;
mod scaffold;

use std::collections::HashMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

pub use extract::{code_blocks, extract_test_code, longest_identifier, ExtractionReport};
pub use framework::{framework, framework_keys, Framework};
pub use scaffold::{scaffold_fallback_tests, test_name};

use crate::template::TemplateError;
use crate::tsl::TslDocument;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodegenError {
    #[error("no usable code block in the completion ({0})")]
    ExtractionEmpty(String),
    #[error("cases missing from the completion: {}", .0.join(", "))]
    MissingCases(Vec<String>),
    #[error("the completion was truncated")]
    TruncatedCompletion,
    #[error("case {id} is claimed by both {first} and {second}")]
    DuplicateCaseId { id: String, first: String, second: String },
    #[error("suite is missing cases: {}", .0.join(", "))]
    IncompleteSuite(Vec<String>),
    #[error("file {file} claims case {id}, which the TSL document does not contain")]
    UnknownCase { id: String, file: String },
    #[error("unknown framework `{0}`")]
    UnknownFramework(String),
    #[error(transparent)]
    Template(#[from] TemplateError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestFile {
    pub file_name: String,
    pub group: String,
    pub content: String,
    pub case_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    #[serde(rename = "file")]
    pub file_name: String,
    pub test_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestSuite {
    pub files: Vec<TestFile>,
    pub framework_key: String,
    /// Case id to its file and test, in TSL document order.
    pub manifest: IndexMap<String, ManifestEntry>,
}

impl TestSuite {
    pub fn new(framework_key: &str) -> Self {
        TestSuite { files: Vec::new(), framework_key: framework_key.to_string(), manifest: IndexMap::new() }
    }

    pub fn manifest_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        text.push('\n');
        text
    }
}

/// File-name stem for a group: letters and digits, other runs folded to `_`.
pub(crate) fn file_stem(group: &str) -> String {
    let mut out = String::new();
    for c in group.chars() {
        if c.is_alphanumeric() {
            out.push(c);
        } else if !out.ends_with('_') && !out.is_empty() {
            out.push('_');
        }
    }
    let out = out.trim_end_matches('_').to_string();
    if out.is_empty() {
        "tests".into()
    } else {
        out
    }
}

/// Joins per-segment files into one suite, renumbering file names per group
/// and building the manifest in document order.
pub fn merge_segments(
    per_segment: Vec<Vec<TestFile>>,
    doc: &TslDocument,
    framework_key: &str,
) -> Result<TestSuite, CodegenError> {
    let mut suite = TestSuite::new(framework_key);
    let mut counters: HashMap<String, usize> = HashMap::new();
    let mut claims: HashMap<String, (String, String)> = HashMap::new();
    let mut used_names: HashMap<String, String> = HashMap::new();

    for mut file in per_segment.into_iter().flatten() {
        let stem = file_stem(&file.group);
        let k = counters.entry(stem.clone()).or_default();
        *k += 1;
        file.file_name = format!("{stem}{k}.tests");
        for id in &file.case_ids {
            if doc.case(id).is_none() {
                return Err(CodegenError::UnknownCase { id: id.clone(), file: file.file_name.clone() });
            }
            if let Some((first, _)) = claims.get(id) {
                return Err(CodegenError::DuplicateCaseId {
                    id: id.clone(),
                    first: first.clone(),
                    second: file.file_name.clone(),
                });
            }
            let mut name = longest_identifier(&file.content, id).unwrap_or(id).to_string();
            if used_names.get(&name).is_some_and(|owner| owner != id) {
                name = format!("{name}_{stem}");
            }
            used_names.insert(name.clone(), id.clone());
            claims.insert(id.clone(), (file.file_name.clone(), name));
        }
        suite.files.push(file);
    }

    let missing: Vec<String> = doc.ids().filter(|id| !claims.contains_key(*id)).map(String::from).collect();
    if !missing.is_empty() {
        return Err(CodegenError::IncompleteSuite(missing));
    }
    for id in doc.ids() {
        let (file_name, test_name) = claims.remove(id).expect("checked above");
        suite.manifest.insert(id.to_string(), ManifestEntry { file_name, test_name });
    }
    Ok(suite)
}

#[cfg(test)]
mod tests;
