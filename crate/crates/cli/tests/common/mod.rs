#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::Parser;
use resttsl_cli::{execute, Args};
use resttsl_core::gateway::{FailingTransport, HttpResponse, HttpTransport, TransportError};
use serde_json::{json, Value};
use tempfile::TempDir;

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel).canonicalize().unwrap()
}

pub fn fixture_text(rel: &str) -> String {
    fs::read_to_string(fixture(rel)).unwrap()
}

/// A temporary directory holding a config file; `FIX/` in the config text
/// points at the fixtures directory.
pub struct Workspace {
    pub dir: TempDir,
}

impl Workspace {
    pub fn new(config: &str) -> Workspace {
        let dir = TempDir::new().unwrap();
        let root = fixture("");
        fs::write(dir.path().join("resttsl.yaml"), config.replace("FIX/", &format!("{}/", root.display()))).unwrap();
        Workspace { dir }
    }

    /// Copies a fixture directory and uses its `resttsl.yaml`.
    pub fn copy_of(rel: &str) -> Workspace {
        let dir = TempDir::new().unwrap();
        copy_dir(&fixture(rel), dir.path());
        Workspace { dir }
    }

    pub fn config(&self) -> PathBuf {
        self.dir.path().join("resttsl.yaml")
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    pub fn read(&self, rel: &str) -> String {
        fs::read_to_string(self.path(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
    }

    pub fn exists(&self, rel: &str) -> bool {
        self.path(rel).exists()
    }

    pub fn run_with(&self, args: &[&str], transport: Arc<dyn HttpTransport>) -> i32 {
        let config = self.config();
        let mut argv = vec!["resttsl", "--config", config.to_str().unwrap()];
        argv.extend_from_slice(args);
        execute(Args::try_parse_from(argv).unwrap(), Some(transport))
    }

    /// Runs with a transport that refuses every request; returns the exit
    /// code and the number of attempted connections.
    pub fn run(&self, args: &[&str]) -> (i32, usize) {
        let transport = Arc::new(FailingTransport::new());
        let code = self.run_with(args, transport.clone());
        (code, transport.attempts())
    }
}

pub fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            fs::copy(entry.path(), &target).unwrap();
        }
    }
}

/// Every file under `dir` with its bytes, sorted by path.
pub fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.clone(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

pub const MOCK_CONFIG: &str = r#"
mode: mock
run_root: runs
models:
  - provider_key: open_router
    model_id: model-a
    price_in_per_million: 2.5
    price_out_per_million: 10
  - provider_key: open_router
    model_id: model-b
projects:
  - id: accounts
    openapi: FIX/specs/accounts-api.yaml
mock:
  - stage: ActionGenerateTsl
    content_file: FIX/completions/login.tsl.yaml
  - stage: ActionGenerateTests
    content_file: FIX/completions/login-tests.md
"#;

/// Answers chat requests like an OpenAI-compatible endpoint: the canned
/// test code when the last message carries `TC101`, the canned TSL
/// otherwise.
pub struct ScriptedChat {
    pub calls: std::sync::Mutex<Vec<Value>>,
}

impl ScriptedChat {
    pub fn new() -> Self {
        ScriptedChat { calls: std::sync::Mutex::new(Vec::new()) }
    }
}

impl HttpTransport for ScriptedChat {
    fn post_json(
        &self,
        _: &str,
        _: &[(String, String)],
        body: &Value,
        _: Duration,
    ) -> Result<HttpResponse, TransportError> {
        self.calls.lock().unwrap().push(body.clone());
        let last =
            body["messages"].as_array().and_then(|m| m.last()).map(|m| m["content"].to_string()).unwrap_or_default();
        let content = if last.contains("TC101") {
            fixture_text("completions/login-tests.md")
        } else {
            format!("Here is the TSL:\n\n```yaml\n{}```\n", fixture_text("completions/login.tsl.yaml"))
        };
        let reply = json!({
            "choices": [{"message": {"role": "assistant", "content": content}, "finish_reason": "stop"}],
            "usage": {"prompt_tokens": 1200, "completion_tokens": 300}
        });
        Ok(HttpResponse { status: 200, body: reply.to_string() })
    }
}
