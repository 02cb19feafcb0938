use std::collections::HashSet;

use indexmap::IndexMap;
use serde_json::{Map, Value};

use super::matcher::{matcher_expr, parse_matcher_expr, MATCHER_PREFIX};
use super::model::*;
use super::yaml::{self, Node};
use super::TslError;
use crate::openapi::{HttpMethod, UNTAGGED};

/// Parses a YAML sequence of test-case mappings.
pub fn parse_tsl(document_text: &str) -> Result<TslDocument, TslError> {
    let root: Value = serde_yaml::from_str(document_text).map_err(|e| TslError::TslSyntax(e.to_string()))?;
    let Value::Array(items) = root else {
        return Err(TslError::TslSyntax("expected a sequence of test cases".into()));
    };
    let mut seen = HashSet::new();
    let mut cases = Vec::with_capacity(items.len());
    for (index, item) in items.into_iter().enumerate() {
        let case = parse_case(index, item)?;
        if !seen.insert(case.id.clone()) {
            return Err(TslError::DuplicateId(case.id));
        }
        cases.push(case);
    }
    Ok(TslDocument { cases })
}

fn parse_case(index: usize, item: Value) -> Result<TslCase, TslError> {
    let Value::Object(mut map) = item else {
        return Err(TslError::TslSyntax(format!("case #{} is not a mapping", index + 1)));
    };
    let missing = |field: &str, case: &str| TslError::MissingField { case: case.to_string(), field: field.to_string() };
    let position = format!("#{}", index + 1);

    let id = match map.remove("id") {
        Some(v) => scalar_text(&v).filter(|s| !s.is_empty()),
        None => None,
    }
    .ok_or_else(|| missing("id", &position))?;
    let invalid =
        |field: &str, why: String| TslError::InvalidField { case: id.clone(), field: field.to_string(), reason: why };

    let group = map
        .remove("group")
        .and_then(|v| scalar_text(&v))
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| UNTAGGED.to_string());
    let name = map.remove("name").and_then(|v| scalar_text(&v)).unwrap_or_default();
    let endpoint = map
        .remove("endpoint")
        .and_then(|v| scalar_text(&v))
        .filter(|s| !s.is_empty())
        .ok_or_else(|| missing("endpoint", &id))?;
    let method_text = map
        .remove("method")
        .and_then(|v| scalar_text(&v))
        .filter(|s| !s.is_empty())
        .ok_or_else(|| missing("method", &id))?;
    let method: HttpMethod =
        method_text.parse().map_err(|e: crate::openapi::UnknownMethod| invalid("method", e.to_string()))?;

    let preconditions = match map.remove("preconditions") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| scalar_text(v).ok_or_else(|| invalid("preconditions", "entries must be text".into())))
            .collect::<Result<_, _>>()?,
        Some(v) => vec![scalar_text(&v).ok_or_else(|| invalid("preconditions", "expected a list of text".into()))?],
    };

    let mut params = |field: &str| -> Result<Option<ParamMap>, TslError> {
        match map.remove(field) {
            None => Ok(None),
            Some(Value::Object(m)) => {
                let mut out = IndexMap::new();
                for (k, v) in m {
                    if v.is_array() || v.is_object() {
                        return Err(invalid(field, format!("`{k}` must be a scalar")));
                    }
                    out.insert(k, v);
                }
                Ok(Some(out))
            }
            Some(_) => Err(invalid(field, "expected a mapping".into())),
        }
    };
    let path_params = params("path_params")?;
    let query_params = params("query_params")?;
    let headers = params("headers")?;
    let request_body = map.remove("request_body");

    let Some(expected) = map.remove("expected_response") else {
        return Err(missing("expected_response", &id));
    };
    let Value::Object(mut expected) = expected else {
        return Err(invalid("expected_response", "expected a mapping".into()));
    };
    let status_code = match expected.remove("status_code") {
        None => return Err(missing("expected_response.status_code", &id)),
        Some(v) => status_from(&v)
            .ok_or_else(|| invalid("expected_response.status_code", format!("`{v}` is not an HTTP status")))?,
    };
    let body = match expected.remove("body") {
        None => None,
        Some(v) => Some(matcher_from(&id, "body", v)?),
    };

    Ok(TslCase {
        id,
        group,
        name,
        endpoint,
        method,
        preconditions,
        path_params,
        query_params,
        headers,
        request_body,
        expected_response: ExpectedResponse { status_code, body },
    })
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn status_from(v: &Value) -> Option<u16> {
    let n = match v {
        Value::Number(n) => n.as_u64()?,
        Value::String(s) => s.trim().parse().ok()?,
        _ => return None,
    };
    (100..=599).contains(&n).then_some(n as u16)
}

fn matcher_from(case: &str, path: &str, value: Value) -> Result<MatcherTree, TslError> {
    Ok(match value {
        Value::Object(map) => {
            let mut fields = IndexMap::new();
            for (k, v) in map {
                let child = matcher_from(case, &format!("{path}.{k}"), v)?;
                fields.insert(k, child);
            }
            MatcherTree::Object(fields)
        }
        Value::Array(items) => MatcherTree::Array(
            items
                .into_iter()
                .enumerate()
                .map(|(i, v)| matcher_from(case, &format!("{path}[{i}]"), v))
                .collect::<Result<_, _>>()?,
        ),
        Value::String(s) if s.starts_with(MATCHER_PREFIX) => parse_matcher_expr(&s).ok_or_else(|| {
            TslError::MatcherSyntax { case: case.to_string(), field: path.to_string(), text: s.clone() }
        })?,
        scalar => MatcherTree::Exact(scalar),
    })
}

/// Canonical YAML rendering: fixed field order, 2-space indentation, data
/// strings double-quoted and matcher expressions written plain.
pub fn serialize_tsl(doc: &TslDocument) -> String {
    yaml::render_document(doc.cases.iter().map(case_node).collect())
}

fn case_node(case: &TslCase) -> Node {
    let mut fields = vec![
        ("id".to_string(), Node::text(&case.id)),
        ("group".to_string(), Node::text(&case.group)),
        ("name".to_string(), Node::text(&case.name)),
        ("endpoint".to_string(), Node::text(&case.endpoint)),
        ("method".to_string(), Node::text(case.method.as_str())),
    ];
    if !case.preconditions.is_empty() {
        fields.push((
            "preconditions".into(),
            Node::Seq(case.preconditions.iter().map(|p| Node::Scalar(yaml::quote(p))).collect()),
        ));
    }
    for (label, params) in
        [("path_params", &case.path_params), ("query_params", &case.query_params), ("headers", &case.headers)]
    {
        if let Some(p) = params {
            let map: Map<String, Value> = p.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
            fields.push((label.into(), Node::data(&Value::Object(map))));
        }
    }
    if let Some(body) = &case.request_body {
        fields.push(("request_body".into(), Node::data(body)));
    }
    let mut expected = vec![("status_code".to_string(), Node::Scalar(case.expected_response.status_code.to_string()))];
    if let Some(body) = &case.expected_response.body {
        expected.push(("body".into(), matcher_node(body)));
    }
    fields.push(("expected_response".into(), Node::Map(expected)));
    Node::Map(fields)
}

fn matcher_node(m: &MatcherTree) -> Node {
    match m {
        MatcherTree::Exact(v) => Node::data(v),
        MatcherTree::TypeIs(_) | MatcherTree::NonEmpty(_) => {
            Node::Scalar(matcher_expr(m).expect("leaf matcher has an expression"))
        }
        MatcherTree::Object(fields) => Node::Map(fields.iter().map(|(k, v)| (yaml::key(k), matcher_node(v))).collect()),
        MatcherTree::Array(items) => Node::Seq(items.iter().map(matcher_node).collect()),
    }
}
