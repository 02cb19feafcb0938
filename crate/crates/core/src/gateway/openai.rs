use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::retry::{with_retries, Backoff, Outcome, Sleeper};
use super::{approx_tokens, ChatProvider, ChatRequest, Completion, GatewayError, ProviderConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    #[error("timed out")]
    Timeout,
    #[error("connection failed: {0}")]
    Connection(String),
}

pub trait HttpTransport: Send + Sync {
    fn post_json(
        &self,
        url: &str,
        headers: &[(String, String)],
        body: &Value,
        timeout: Duration,
    ) -> Result<HttpResponse, TransportError>;
}

pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl ReqwestTransport {
    pub fn new() -> Result<Self, GatewayError> {
        let client =
            reqwest::blocking::Client::builder().build().map_err(|e| GatewayError::ProviderError(e.to_string()))?;
        Ok(ReqwestTransport { client })
    }
}

impl HttpTransport for ReqwestTransport {
    fn post_json(
        &self,
        url: &str,
        headers: &[(String, String)],
        body: &Value,
        timeout: Duration,
    ) -> Result<HttpResponse, TransportError> {
        let mut request = self.client.post(url).timeout(timeout).json(body);
        for (k, v) in headers {
            request = request.header(k, v);
        }
        let response = request.send().map_err(|e| {
            if e.is_timeout() {
                TransportError::Timeout
            } else {
                TransportError::Connection(e.to_string())
            }
        })?;
        let status = response.status().as_u16();
        let body = response.text().map_err(|e| TransportError::Connection(e.to_string()))?;
        Ok(HttpResponse { status, body })
    }
}

/// Refuses every request and counts the attempts. Offline runs inject it so
/// any network use is observable.
#[derive(Debug, Default)]
pub struct FailingTransport {
    attempts: AtomicUsize,
}

impl FailingTransport {
    pub fn new() -> Self {
        FailingTransport::default()
    }

    pub fn attempts(&self) -> usize {
        self.attempts.load(Ordering::SeqCst)
    }
}

impl HttpTransport for FailingTransport {
    fn post_json(
        &self,
        url: &str,
        _: &[(String, String)],
        _: &Value,
        _: Duration,
    ) -> Result<HttpResponse, TransportError> {
        self.attempts.fetch_add(1, Ordering::SeqCst);
        Err(TransportError::Connection(format!("network access is disabled ({url})")))
    }
}

/// Chat endpoint speaking the `/chat/completions` JSON shape.
pub struct OpenAiCompatible {
    transport: Arc<dyn HttpTransport>,
    api_key: Option<String>,
    backoff: Backoff,
    sleep: Sleeper,
}

impl OpenAiCompatible {
    pub fn new(transport: Arc<dyn HttpTransport>, api_key: Option<String>, backoff: Backoff, sleep: Sleeper) -> Self {
        OpenAiCompatible { transport, api_key, backoff, sleep }
    }

    /// Reads the key from `RESTTSL_<PROVIDER_KEY>_API_KEY`.
    pub fn from_env(transport: Arc<dyn HttpTransport>, config: &ProviderConfig, sleep: Sleeper) -> Self {
        let key = std::env::var(config.api_key_env()).ok().filter(|k| !k.trim().is_empty());
        OpenAiCompatible::new(transport, key, Backoff::default(), sleep)
    }

    fn body(config: &ProviderConfig, request: &ChatRequest<'_>) -> Value {
        let mut body = json!({
            "model": config.model_id,
            "messages": request.messages,
            "temperature": config.temperature,
        });
        if let Some(seed) = config.seed {
            body["seed"] = json!(seed);
        }
        if let Some(max) = config.max_output_tokens {
            body["max_tokens"] = json!(max);
        }
        body
    }
}

enum Failure {
    Auth(String),
    Limited,
    Server(String),
    Timeout,
    Malformed(String),
}

fn parse_completion(body: &str, request: &ChatRequest<'_>, latency_ms: u64) -> Result<Completion, String> {
    let v: Value = serde_json::from_str(body).map_err(|e| format!("response is not JSON: {e}"))?;
    let choice = v["choices"].get(0).ok_or("response has no choices")?;
    let content = choice["message"]["content"].as_str().ok_or("choice has no message content")?.to_string();
    let truncated = choice["finish_reason"].as_str() == Some("length");
    let prompt_chars: String = request.messages.iter().map(|m| m.content.as_str()).collect();
    let input_tokens = v["usage"]["prompt_tokens"].as_u64().unwrap_or_else(|| approx_tokens(&prompt_chars));
    let output_tokens = v["usage"]["completion_tokens"].as_u64().unwrap_or_else(|| approx_tokens(&content));
    Ok(Completion { content, input_tokens, output_tokens, latency_ms, truncated })
}

impl ChatProvider for OpenAiCompatible {
    fn send(&self, config: &ProviderConfig, request: &ChatRequest<'_>) -> Result<Completion, GatewayError> {
        config.validate()?;
        let Some(key) = &self.api_key else {
            return Err(GatewayError::AuthError(format!("{} is not set", config.api_key_env())));
        };
        if config.endpoint_url.trim().is_empty() {
            return Err(GatewayError::InvalidConfig(format!("{}: endpoint_url is empty", config.model_id)));
        }
        let body = OpenAiCompatible::body(config, request);
        let headers = vec![("Authorization".to_string(), format!("Bearer {key}"))];
        let timeout = Duration::from_secs(config.timeout_secs.max(1));

        let result = with_retries(config.max_retries, &self.backoff, &self.sleep, |_| {
            let started = Instant::now();
            let response = match self.transport.post_json(&config.endpoint_url, &headers, &body, timeout) {
                Ok(r) => r,
                Err(TransportError::Timeout) => return Outcome::Retry(Failure::Timeout),
                Err(TransportError::Connection(e)) => return Outcome::Retry(Failure::Server(e)),
            };
            let latency = started.elapsed().as_millis() as u64;
            match response.status {
                200..=299 => match parse_completion(&response.body, request, latency) {
                    Ok(c) => Outcome::Done(c),
                    Err(e) => Outcome::Fail(Failure::Malformed(e)),
                },
                401 | 403 => Outcome::Fail(Failure::Auth(format!("HTTP {}", response.status))),
                408 => Outcome::Retry(Failure::Timeout),
                429 => Outcome::Retry(Failure::Limited),
                500..=599 => Outcome::Retry(Failure::Server(format!("HTTP {}", response.status))),
                s => Outcome::Fail(Failure::Malformed(format!("HTTP {s}: {}", response.body))),
            }
        });
        result.map_err(|(failure, attempts)| match failure {
            Failure::Auth(m) => GatewayError::AuthError(m),
            Failure::Limited => GatewayError::RateLimited { attempts },
            Failure::Timeout => GatewayError::Timeout { attempts },
            Failure::Server(m) => GatewayError::ProviderError(format!("{m} (after {attempts} attempts)")),
            Failure::Malformed(m) => GatewayError::ProviderError(m),
        })
    }
}
