use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{fingerprint, ChatProvider, ChatRequest, Completion, GatewayError, ProviderConfig};
use crate::prompt::ChatMessage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub input_tokens: u64,
    pub output_tokens: u64,
}

/// One line of a cassette file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CassetteEntry {
    pub fingerprint: String,
    pub model_id: String,
    pub messages: Vec<ChatMessage>,
    pub content: String,
    pub usage: Usage,
    #[serde(default)]
    pub truncated: bool,
    #[serde(default)]
    pub latency_ms: u64,
}

impl CassetteEntry {
    pub fn completion(&self) -> Completion {
        Completion {
            content: self.content.clone(),
            input_tokens: self.usage.input_tokens,
            output_tokens: self.usage.output_tokens,
            latency_ms: self.latency_ms,
            truncated: self.truncated,
        }
    }
}

/// Recorded transcripts keyed by request fingerprint.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cassette {
    pub entries: IndexMap<String, CassetteEntry>,
}

fn io(path: &Path, e: impl std::fmt::Display) -> GatewayError {
    GatewayError::IoError(format!("{}: {e}", path.display()))
}

impl Cassette {
    pub fn from_jsonl(text: &str) -> Result<Cassette, String> {
        let mut entries = IndexMap::new();
        for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let entry: CassetteEntry = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", n + 1))?;
            entries.insert(entry.fingerprint.clone(), entry);
        }
        Ok(Cassette { entries })
    }

    pub fn to_jsonl(&self) -> String {
        self.entries.values().map(|e| serde_json::to_string(e).expect("entries serialize") + "\n").collect()
    }

    pub fn load(path: &Path) -> Result<Cassette, GatewayError> {
        let text = fs::read_to_string(path).map_err(|e| io(path, e))?;
        Cassette::from_jsonl(&text).map_err(|e| io(path, e))
    }

    pub fn get(&self, fp: &str) -> Option<&CassetteEntry> {
        self.entries.get(fp)
    }

    /// Appends an entry to the file at `path`. A repeated fingerprint
    /// replaces the earlier entry, which rewrites the file.
    pub fn record(
        path: &Path,
        config: &ProviderConfig,
        messages: &[ChatMessage],
        completion: &Completion,
    ) -> Result<(), GatewayError> {
        let entry = CassetteEntry {
            fingerprint: fingerprint(&config.model_id, messages),
            model_id: config.model_id.clone(),
            messages: messages.to_vec(),
            content: completion.content.clone(),
            usage: Usage { input_tokens: completion.input_tokens, output_tokens: completion.output_tokens },
            truncated: completion.truncated,
            latency_ms: completion.latency_ms,
        };
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| io(path, e))?;
        }
        let mut cassette = if path.exists() { Cassette::load(path)? } else { Cassette::default() };
        if cassette.entries.contains_key(&entry.fingerprint) {
            log::warn!("cassette {}: overwriting entry {}", path.display(), entry.fingerprint);
            cassette.entries.insert(entry.fingerprint.clone(), entry);
            let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io(path, e))?;
            tmp.write_all(cassette.to_jsonl().as_bytes()).map_err(|e| io(path, e))?;
            tmp.persist(path).map_err(|e| io(path, e))?;
        } else {
            let mut file = fs::OpenOptions::new().create(true).append(true).open(path).map_err(|e| io(path, e))?;
            let line = serde_json::to_string(&entry).expect("entries serialize") + "\n";
            file.write_all(line.as_bytes()).map_err(|e| io(path, e))?;
        }
        Ok(())
    }
}

/// Answers only from a cassette; never touches the network.
#[derive(Debug, Clone)]
pub struct ReplayProvider {
    cassette: Cassette,
}

impl ReplayProvider {
    pub fn new(cassette: Cassette) -> Self {
        ReplayProvider { cassette }
    }

    pub fn open(path: &Path) -> Result<Self, GatewayError> {
        Ok(ReplayProvider::new(Cassette::load(path)?))
    }
}

impl ChatProvider for ReplayProvider {
    fn send(&self, config: &ProviderConfig, request: &ChatRequest<'_>) -> Result<Completion, GatewayError> {
        let fp = fingerprint(&config.model_id, request.messages);
        self.cassette.get(&fp).map(CassetteEntry::completion).ok_or(GatewayError::CassetteMiss(fp))
    }
}

/// Forwards to `inner` and records every successful exchange.
pub struct RecordingProvider {
    inner: Box<dyn ChatProvider>,
    path: PathBuf,
    lock: Mutex<()>,
}

impl RecordingProvider {
    pub fn new(inner: Box<dyn ChatProvider>, path: impl Into<PathBuf>) -> Self {
        RecordingProvider { inner, path: path.into(), lock: Mutex::new(()) }
    }
}

impl ChatProvider for RecordingProvider {
    fn send(&self, config: &ProviderConfig, request: &ChatRequest<'_>) -> Result<Completion, GatewayError> {
        let completion = self.inner.send(config, request)?;
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        Cassette::record(&self.path, config, request.messages, &completion)?;
        Ok(completion)
    }
}
