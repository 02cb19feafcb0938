use std::str::FromStr;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde_json::Value;

use super::*;
use crate::prompt::ChatMessage;
use crate::tsl::tests::LOGIN_CASE;

fn messages(last: &str) -> Vec<ChatMessage> {
    vec![ChatMessage::system("be a tester"), ChatMessage::user(last)]
}

fn send(
    p: &dyn ChatProvider,
    config: &ProviderConfig,
    stage: PromptStage,
    msgs: &[ChatMessage],
) -> Result<Completion, GatewayError> {
    p.send(config, &ChatRequest { stage, messages: msgs })
}

fn usd(s: &str) -> Decimal {
    Decimal::from_str(s).unwrap()
}

#[test]
fn mock_answers_by_stage_deterministically() {
    let config = ProviderConfig::new("mock", "m1");
    let mock = MockProvider::new(vec![MockRule::for_stage(PromptStage::ActionGenerateTsl, LOGIN_CASE)]);
    let msgs = messages("spec goes here");
    let a = send(&mock, &config, PromptStage::ActionGenerateTsl, &msgs).unwrap();
    assert_eq!(a.content, LOGIN_CASE);
    assert!(!a.truncated);
    assert_eq!(a, send(&mock, &config, PromptStage::ActionGenerateTsl, &msgs).unwrap());
    let miss = send(&mock, &config, PromptStage::ActionGenerateTests, &msgs);
    assert!(matches!(miss, Err(GatewayError::NoRuleMatched(fp)) if fp == fingerprint("m1", &msgs)));
}

#[test]
fn mock_rule_precedence() {
    let config = ProviderConfig::new("mock", "m1");
    let msgs = messages("segment Users");
    let fp = fingerprint("m1", &msgs);
    let mock = MockProvider::new(vec![
        MockRule::for_stage(PromptStage::ActionGenerateTests, "by stage"),
        MockRule::containing("Users", "by text"),
        MockRule::for_fingerprint(fp, "by fingerprint"),
    ]);
    let got = |m: &[ChatMessage]| send(&mock, &config, PromptStage::ActionGenerateTests, m).unwrap().content;
    assert_eq!(got(&msgs), "by fingerprint");
    assert_eq!(got(&messages("other Users")), "by text");
    assert_eq!(got(&messages("Todos")), "by stage");
}

#[test]
fn fingerprints_depend_on_model_and_messages_only() {
    let msgs = messages("x");
    let fp = fingerprint("m1", &msgs);
    assert_eq!(fp.len(), 64);
    assert!(fp.chars().all(|c| c.is_ascii_hexdigit()));
    assert_eq!(fp, fingerprint("m1", &msgs.clone()));
    assert_ne!(fp, fingerprint("m2", &msgs));
    assert_ne!(fp, fingerprint("m1", &messages("y")));
}

#[test]
fn replay_hits_and_misses() {
    let config = ProviderConfig::new("mock", "m1");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cassettes/cassette.jsonl");
    let recorder = RecordingProvider::new(
        Box::new(MockProvider::new(vec![MockRule::for_stage(PromptStage::ActionGenerateTsl, LOGIN_CASE)])),
        &path,
    );
    let first = messages("first");
    let second = messages("second");
    let recorded = send(&recorder, &config, PromptStage::ActionGenerateTsl, &first).unwrap();
    send(&recorder, &config, PromptStage::ActionGenerateTsl, &second).unwrap();
    assert_eq!(Cassette::load(&path).unwrap().entries.len(), 2);
    send(&recorder, &config, PromptStage::ActionGenerateTsl, &first).unwrap();
    assert_eq!(Cassette::load(&path).unwrap().entries.len(), 2);

    let replay = ReplayProvider::open(&path).unwrap();
    assert_eq!(send(&replay, &config, PromptStage::ActionGenerateTsl, &first).unwrap(), recorded);
    assert!(matches!(
        send(&replay, &config, PromptStage::ActionGenerateTsl, &messages("third")),
        Err(GatewayError::CassetteMiss(_))
    ));
}

#[test]
fn cassette_lines_round_trip() {
    let config = ProviderConfig::new("mock", "m1");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.jsonl");
    let completion =
        Completion { content: "ok".into(), input_tokens: 3, output_tokens: 1, latency_ms: 5, truncated: true };
    Cassette::record(&path, &config, &messages("a"), &completion).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let line: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    for key in ["fingerprint", "messages", "content", "usage"] {
        assert!(line.get(key).is_some(), "{key}");
    }
    let cassette = Cassette::from_jsonl(&text).unwrap();
    assert_eq!(Cassette::from_jsonl(&cassette.to_jsonl()).unwrap(), cassette);
    assert_eq!(cassette.get(&fingerprint("m1", &messages("a"))).unwrap().completion(), completion);
}

#[test]
fn unwritable_cassette_path_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let config = ProviderConfig::new("mock", "m1");
    let completion =
        Completion { content: "ok".into(), input_tokens: 0, output_tokens: 0, latency_ms: 0, truncated: false };
    let err = Cassette::record(&blocker.join("c.jsonl"), &config, &messages("a"), &completion).unwrap_err();
    assert!(matches!(err, GatewayError::IoError(_)));
}

fn priced(input: &str, output: &str) -> ProviderConfig {
    let mut c = ProviderConfig::new("openai", "gpt");
    c.price_in_per_million = usd(input);
    c.price_out_per_million = usd(output);
    c
}

#[test]
fn cost_estimates() {
    let c = priced("3", "15");
    assert_eq!(format_usd(estimate_cost(1_000_000, 0, &c)), "$3.0000");
    assert_eq!(estimate_cost(0, 0, &c), Decimal::ZERO);
    assert_eq!(estimate_cost(1, 1, &c), usd("0.000018"));
}

#[test]
fn ledger_reproduces_a_project_total_of_047() {
    let config = priced("2.5", "10");
    let calls = [
        ("ActionGenerateTsl", 30_000, 8_000),
        ("ActionGenerateTests", 40_000, 9_000),
        ("ActionGenerateTests", 30_000, 5_000),
    ];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ledger.jsonl");
    let mut ledger = CostLedger::default();
    for (stage, i, o) in calls {
        let completion =
            Completion { content: String::new(), input_tokens: i, output_tokens: o, latency_ms: 0, truncated: false };
        let entry = CostLedger::entry(&config, "todo-api", stage, &completion);
        CostLedger::append(&path, &entry).unwrap();
        ledger.push(entry);
    }
    assert_eq!(ledger.total(), usd("0.47"));
    assert_eq!(ledger.total_for("gpt", "todo-api"), usd("0.47"));
    assert_eq!(ledger.totals().len(), 1);
    assert_eq!(CostLedger::load(&path).unwrap(), ledger);
}

#[test]
fn prices_deserialize_from_plain_numbers() {
    let c: ProviderConfig = serde_json::from_str(
        r#"{"provider_key":"x","model_id":"m","price_in_per_million":0.47,"price_out_per_million":"10"}"#,
    )
    .unwrap();
    assert_eq!(c.price_in_per_million, usd("0.47"));
    assert_eq!(c.price_out_per_million, usd("10"));
    assert_eq!(c.temperature, 1.0);
    assert_eq!(c.max_retries, 3);
}

#[test]
fn config_validation_and_key_name() {
    let mut c = ProviderConfig::new("open-router", "m");
    assert_eq!(c.api_key_env(), "RESTTSL_OPEN_ROUTER_API_KEY");
    assert!(c.validate().is_ok());
    c.temperature = -1.0;
    assert!(matches!(c.validate(), Err(GatewayError::InvalidConfig(_))));
    c.temperature = 1.0;
    c.price_out_per_million = usd("-1");
    assert!(matches!(c.validate(), Err(GatewayError::InvalidConfig(_))));
}

/// Replays a fixed list of responses and records every attempt.
struct Scripted {
    replies: Mutex<Vec<Result<HttpResponse, TransportError>>>,
    calls: Mutex<Vec<Value>>,
}

impl Scripted {
    fn new(mut replies: Vec<Result<HttpResponse, TransportError>>) -> Arc<Self> {
        replies.reverse();
        Arc::new(Scripted { replies: Mutex::new(replies), calls: Mutex::new(Vec::new()) })
    }

    fn calls(&self) -> usize {
        self.calls.lock().unwrap().len()
    }
}

impl HttpTransport for Scripted {
    fn post_json(
        &self,
        _: &str,
        _: &[(String, String)],
        body: &Value,
        _: Duration,
    ) -> Result<HttpResponse, TransportError> {
        self.calls.lock().unwrap().push(body.clone());
        self.replies.lock().unwrap().pop().unwrap_or(Err(TransportError::Timeout))
    }
}

fn status(code: u16) -> Result<HttpResponse, TransportError> {
    Ok(HttpResponse { status: code, body: String::new() })
}

fn ok(content: &str, finish: &str) -> Result<HttpResponse, TransportError> {
    let body = serde_json::json!({
        "choices": [{"message": {"content": content}, "finish_reason": finish}],
        "usage": {"prompt_tokens": 12, "completion_tokens": 4}
    });
    Ok(HttpResponse { status: 200, body: body.to_string() })
}

fn live(transport: Arc<dyn HttpTransport>, slept: Arc<Mutex<Vec<Duration>>>) -> OpenAiCompatible {
    let sleeper: Sleeper = Arc::new(move |d| slept.lock().unwrap().push(d));
    OpenAiCompatible::new(transport, Some("k".into()), Backoff::default(), sleeper)
}

fn live_config() -> ProviderConfig {
    let mut c = ProviderConfig::new("openai", "gpt");
    c.endpoint_url = "http://localhost/v1/chat/completions".into();
    c.seed = Some(7);
    c.max_retries = 2;
    c
}

#[test]
fn transient_failures_are_retried_with_growing_delays() {
    let t = Scripted::new(vec![status(429), status(503), ok("hi", "stop")]);
    let slept = Arc::new(Mutex::new(Vec::new()));
    let p = live(t.clone(), slept.clone());
    let c = send(&p, &live_config(), PromptStage::ActionGenerateTsl, &messages("x")).unwrap();
    assert_eq!((c.content.as_str(), c.input_tokens, c.output_tokens, c.truncated), ("hi", 12, 4, false));
    assert_eq!(t.calls(), 3);
    assert_eq!(*slept.lock().unwrap(), [Duration::from_millis(500), Duration::from_millis(1000)]);
    let body = &t.calls.lock().unwrap()[0];
    assert_eq!(body["model"], "gpt");
    assert_eq!(body["seed"], 7);
    assert_eq!(body["messages"][1]["role"], "user");
}

#[test]
fn retries_are_bounded() {
    let t = Scripted::new(vec![status(429); 10]);
    let p = live(t.clone(), Arc::default());
    let err = send(&p, &live_config(), PromptStage::ActionGenerateTsl, &messages("x")).unwrap_err();
    assert_eq!(err, GatewayError::RateLimited { attempts: 3 });
    assert_eq!(t.calls(), 3);

    let t = Scripted::new(vec![]);
    let err = send(&live(t.clone(), Arc::default()), &live_config(), PromptStage::ActionGenerateTsl, &messages("x"));
    assert_eq!(err.unwrap_err(), GatewayError::Timeout { attempts: 3 });
}

#[test]
fn fatal_statuses_stop_immediately() {
    let t = Scripted::new(vec![status(401)]);
    let err = send(&live(t.clone(), Arc::default()), &live_config(), PromptStage::ActionGenerateTsl, &messages("x"));
    assert!(matches!(err, Err(GatewayError::AuthError(_))));
    assert_eq!(t.calls(), 1);

    let t = Scripted::new(vec![Ok(HttpResponse { status: 200, body: "{}".into() })]);
    let err = send(&live(t.clone(), Arc::default()), &live_config(), PromptStage::ActionGenerateTsl, &messages("x"));
    assert!(matches!(err, Err(GatewayError::ProviderError(_))));
    assert_eq!(t.calls(), 1);
}

#[test]
fn length_stop_marks_truncation() {
    let t = Scripted::new(vec![ok("half", "length")]);
    let c = send(&live(t, Arc::default()), &live_config(), PromptStage::ActionGenerateTests, &messages("x")).unwrap();
    assert!(c.truncated);
}

#[test]
fn missing_key_never_touches_the_network() {
    let t = Arc::new(FailingTransport::new());
    let p = OpenAiCompatible::new(t.clone(), None, Backoff::default(), no_sleep());
    let err = send(&p, &live_config(), PromptStage::ActionGenerateTsl, &messages("x")).unwrap_err();
    assert!(matches!(err, GatewayError::AuthError(m) if m.contains("RESTTSL_OPENAI_API_KEY")));
    assert_eq!(t.attempts(), 0);

    let p = OpenAiCompatible::new(t.clone(), Some("k".into()), Backoff::default(), no_sleep());
    assert!(send(&p, &live_config(), PromptStage::ActionGenerateTsl, &messages("x")).is_err());
    assert_eq!(t.attempts(), 3);
}

#[test]
fn token_estimate_rounds_up() {
    assert_eq!(approx_tokens(""), 0);
    assert_eq!(approx_tokens("abcde"), 2);
}
