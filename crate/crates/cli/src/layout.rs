//! Where each artifact of a (model, project) run lives.
//!
//! ```text
//! <run_root>/<model>/<project>/
//!     prompts/tsl.txt  prompts/tests.txt
//!     responses/tsl.txt  responses/tests-01.txt ...
//!     tsl.tsl.yaml  provenance.json  issues.json
//!     tests/<Group>1.tests ...  tests/manifest.json
//!     metrics.json  ledger.jsonl  cassettes/cassette.jsonl
//! <run_root>/_derived/<project>/   deriver output not tied to a model
//! <run_root>/reports/              score and rank reports
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::slug;
use crate::error::CliError;

pub const DERIVED_DIR: &str = "_derived";
pub const REPORTS_DIR: &str = "reports";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunDir {
    pub root: PathBuf,
}

impl RunDir {
    pub fn for_model(run_root: &Path, model_id: &str, project_id: &str) -> RunDir {
        RunDir { root: run_root.join(slug(model_id)).join(slug(project_id)) }
    }

    pub fn derived(run_root: &Path, project_id: &str) -> RunDir {
        RunDir { root: run_root.join(DERIVED_DIR).join(slug(project_id)) }
    }

    pub fn prompt(&self, name: &str) -> PathBuf {
        self.root.join("prompts").join(format!("{name}.txt"))
    }

    pub fn response(&self, name: &str) -> PathBuf {
        self.root.join("responses").join(format!("{name}.txt"))
    }

    pub fn tests_response(&self, k: usize) -> PathBuf {
        self.response(&format!("tests-{:02}", k + 1))
    }

    pub fn tsl(&self) -> PathBuf {
        self.root.join("tsl.tsl.yaml")
    }

    pub fn provenance(&self) -> PathBuf {
        self.root.join("provenance.json")
    }

    pub fn issues(&self) -> PathBuf {
        self.root.join("issues.json")
    }

    pub fn tests_dir(&self) -> PathBuf {
        self.root.join("tests")
    }

    pub fn manifest(&self) -> PathBuf {
        self.tests_dir().join("manifest.json")
    }

    pub fn metrics(&self) -> PathBuf {
        self.root.join("metrics.json")
    }

    pub fn ledger(&self) -> PathBuf {
        self.root.join("ledger.jsonl")
    }

    pub fn cassette(&self) -> PathBuf {
        self.root.join("cassettes").join("cassette.jsonl")
    }

    /// Raw test completions from an earlier run, oldest first.
    pub fn tests_responses(&self) -> Vec<PathBuf> {
        let dir = self.root.join("responses");
        let mut found: Vec<PathBuf> = fs::read_dir(&dir)
            .into_iter()
            .flatten()
            .flatten()
            .map(|e| e.path())
            .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("tests-")))
            .collect();
        found.sort();
        found
    }
}

/// Writes through a temporary file in the target directory, then renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn remove_dir(path: &Path) -> Result<(), CliError> {
    match fs::remove_dir_all(path) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
        Err(e) => Err(CliError::io(path, e)),
    }
}

pub fn json(value: &impl serde::Serialize) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("artifacts serialize");
    text.push('\n');
    text
}
