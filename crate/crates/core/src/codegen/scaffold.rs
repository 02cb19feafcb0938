//! Template-driven test generation straight from TSL, without a model.

use std::sync::LazyLock;

use indexmap::IndexMap;
use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use regex::Regex;
use serde_json::Value;

use super::framework::{Dialect, Part, RootShape, Step};
use super::{framework, CodegenError, ManifestEntry, TestFile, TestSuite};
use crate::template;
use crate::tsl::{MatcherTree, TslCase, TslDocument};

static EMAIL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[^@\s]+@[^@\s]+\.[A-Za-z]{2,}$").expect("valid regex"));

const UNRESERVED: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_').remove(b'~');

/// `<id>_<name with spaces replaced by underscores>`.
pub fn test_name(case: &TslCase) -> String {
    let name = super::framework::identifier(case.name.trim());
    if name.is_empty() {
        case.id.clone()
    } else {
        format!("{}_{}", case.id, name)
    }
}

/// One AAA-structured test per case, one file per group.
pub fn scaffold_fallback_tests(doc: &TslDocument, framework_key: &str) -> Result<TestSuite, CodegenError> {
    let fw = framework(framework_key).ok_or_else(|| CodegenError::UnknownFramework(framework_key.to_string()))?;
    template::check("file", fw.file_template, &["class_name", "tests"], &["tests"])?;
    template::check(
        "test",
        fw.test_template,
        &["test_name", "arrange", "act", "assert"],
        &["test_name", "arrange", "act", "assert"],
    )?;

    let mut groups: IndexMap<&str, Vec<&TslCase>> = IndexMap::new();
    for case in &doc.cases {
        groups.entry(case.group.as_str()).or_default().push(case);
    }

    let mut suite = TestSuite::new(framework_key);
    for (group, cases) in groups {
        let stem = super::file_stem(group);
        let file_name = format!("{stem}1.tests");
        let mut tests = Vec::with_capacity(cases.len());
        for case in &cases {
            let name = test_name(case);
            let body = render_case(fw.dialect, case);
            let text = template::render(
                "test",
                fw.test_template,
                &[("test_name", &name), ("arrange", &body.arrange), ("act", &body.act), ("assert", &body.assert)],
            )?;
            tests.push(text.trim_end().to_string());
            suite.manifest.insert(case.id.clone(), ManifestEntry { file_name: file_name.clone(), test_name: name });
        }
        let content = template::render(
            "file",
            fw.file_template,
            &[("class_name", &format!("{stem}Tests")), ("tests", &tests.join("\n\n"))],
        )?;
        suite.files.push(TestFile {
            file_name,
            group: group.to_string(),
            content,
            case_ids: cases.iter().map(|c| c.id.clone()).collect(),
        });
    }
    Ok(suite)
}

struct Sections {
    arrange: String,
    act: String,
    assert: String,
}

fn render_case(d: &dyn Dialect, case: &TslCase) -> Sections {
    let indent = d.indent();
    let block = |lines: Vec<String>| lines.iter().map(|l| format!("{indent}{l}")).collect::<Vec<_>>().join("\n");

    // unique-value helpers replace email literals of the request body
    let mut emails: IndexMap<String, String> = IndexMap::new();
    if let Some(body) = &case.request_body {
        collect_emails(body, None, &mut emails, d);
    }
    let lookup = |s: &str| emails.get(s).cloned();

    let mut arrange = Vec::new();
    for (_, var) in &emails {
        arrange.push(d.declare(var, d.unique_email()));
    }
    for pre in &case.preconditions {
        let pre = pre.replace(['\n', '\r'], " ");
        arrange.push(d.await_precondition(&text_expr(d, &pre, &emails)));
    }
    if let Some(body) = &case.request_body {
        arrange.push(d.declare("payload", &d.value(body, &lookup)));
    }
    let headers: Vec<(String, String)> =
        case.headers.iter().flatten().map(|(k, v)| (k.clone(), d.string(&scalar_text(v)))).collect();
    if !headers.is_empty() {
        arrange.push(d.declare("headers", &d.headers(&headers)));
    }
    if arrange.is_empty() {
        arrange.push(d.comment("No setup required"));
    }

    let act = vec![d.send(
        case.method.as_str(),
        &d.string(&concrete_url(case)),
        case.request_body.is_some(),
        !headers.is_empty(),
    )];

    let mut assert = Vec::new();
    match &case.expected_response.body {
        Some(matcher) => {
            let shape = match matcher {
                MatcherTree::Object(_) => RootShape::Object,
                MatcherTree::Array(_) => RootShape::Array,
                _ => RootShape::Other,
            };
            assert.push(d.read_body(shape));
            assert.push(d.assert_status(case.expected_response.status_code));
            assertions(d, matcher, "body", &mut assert);
        }
        None => assert.push(d.assert_status(case.expected_response.status_code)),
    }

    Sections { arrange: block(arrange), act: block(act), assert: block(assert) }
}

fn collect_emails(value: &Value, key: Option<&str>, out: &mut IndexMap<String, String>, d: &dyn Dialect) {
    match value {
        Value::String(s) if EMAIL.is_match(s) && !out.contains_key(s) => {
            let base = key
                .map(|k| lower_camel(&d.identifier(k)))
                .filter(|k| k.chars().next().is_some_and(char::is_alphabetic))
                .unwrap_or_else(|| "email".to_string());
            let mut name = base.clone();
            let mut n = 2;
            while out.values().any(|v| *v == name) || RESERVED_NAMES.contains(&name.as_str()) {
                name = format!("{base}{n}");
                n += 1;
            }
            out.insert(s.clone(), name);
        }
        Value::Array(items) => items.iter().for_each(|v| collect_emails(v, key, out, d)),
        Value::Object(map) => map.iter().for_each(|(k, v)| collect_emails(v, Some(k), out, d)),
        _ => {}
    }
}

const RESERVED_NAMES: [&str; 5] = ["payload", "headers", "response", "body", "api"];

fn lower_camel(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// A string expression for free text, interpolating email variables.
fn text_expr(d: &dyn Dialect, text: &str, emails: &IndexMap<String, String>) -> String {
    let mut parts: Vec<Part> = vec![Part::Text(text)];
    for (literal, var) in emails {
        parts = parts
            .into_iter()
            .flat_map(|part| match part {
                Part::Text(t) if t.contains(literal.as_str()) => {
                    let mut split = Vec::new();
                    for (i, piece) in t.split(literal.as_str()).enumerate() {
                        if i > 0 {
                            split.push(Part::Var(var.as_str()));
                        }
                        if !piece.is_empty() {
                            split.push(Part::Text(piece));
                        }
                    }
                    split
                }
                other => vec![other],
            })
            .collect();
    }
    if parts.iter().any(|p| matches!(p, Part::Var(_))) {
        d.interpolated(&parts)
    } else {
        d.string(text)
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// The endpoint with path parameters filled in and query parameters appended.
fn concrete_url(case: &TslCase) -> String {
    let mut url = case.endpoint.clone();
    for (name, value) in case.path_params.iter().flatten() {
        let encoded = utf8_percent_encode(&scalar_text(value), UNRESERVED).to_string();
        url = url.replace(&format!("{{{name}}}"), &encoded);
    }
    if let Some(query) = case.query_params.as_ref().filter(|q| !q.is_empty()) {
        let pairs: Vec<String> = query
            .iter()
            .map(|(k, v)| {
                format!("{}={}", utf8_percent_encode(k, UNRESERVED), utf8_percent_encode(&scalar_text(v), UNRESERVED))
            })
            .collect();
        url.push(if url.contains('?') { '&' } else { '?' });
        url.push_str(&pairs.join("&"));
    }
    url
}

fn assertions(d: &dyn Dialect, matcher: &MatcherTree, target: &str, out: &mut Vec<String>) {
    match matcher {
        MatcherTree::Exact(v) => out.push(d.assert_exact(target, v)),
        MatcherTree::TypeIs(k) => out.push(d.assert_kind(target, *k)),
        MatcherTree::NonEmpty(k) => out.push(d.assert_non_empty(target, *k)),
        MatcherTree::Object(fields) => {
            for (name, child) in fields {
                assertions(d, child, &d.access(target, &Step::Field(name.clone())), out);
            }
        }
        MatcherTree::Array(items) => {
            out.push(d.assert_len(target, items.len()));
            for (i, child) in items.iter().enumerate() {
                assertions(d, child, &d.access(target, &Step::Index(i)), out);
            }
        }
    }
}
