use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::matcher::MATCHER_PREFIX;
use super::model::{MatcherTree, TslCase, TslDocument};
use crate::openapi::{ApiDocument, EndpointDef, SchemaKind, SchemaNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IssueCode {
    UnknownEndpoint,
    MethodMismatch,
    UndeclaredStatus,
    UnknownBodyField,
    MissingRequiredField,
    DuplicateId,
    MatcherSyntax,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationIssue {
    /// Offending case, or `-` for document-level issues.
    pub case_id: String,
    pub severity: Severity,
    pub code: IssueCode,
    pub message: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} [{:?}] {}: {}", self.code, self.case_id, self.message)
    }
}

pub fn has_errors(issues: &[ValidationIssue]) -> bool {
    issues.iter().any(|i| i.severity == Severity::Error)
}

/// Does a case endpoint (template or concrete path) address the declared template?
pub fn path_matches(template: &str, endpoint: &str) -> bool {
    let endpoint = endpoint.split('?').next().unwrap_or_default();
    let t: Vec<&str> = template.trim_end_matches('/').split('/').collect();
    let e: Vec<&str> = endpoint.trim_end_matches('/').split('/').collect();
    t.len() == e.len()
        && t.iter().zip(&e).all(|(ts, es)| {
            let t_param = ts.starts_with('{') && ts.ends_with('}');
            let e_param = es.starts_with('{') && es.ends_with('}');
            if t_param {
                !es.is_empty()
            } else {
                !e_param && ts == es
            }
        })
}

/// Checks every case against the declared API surface.
///
/// Issues are data: an empty result means every case names a declared
/// endpoint, method and status.
pub fn validate_against_spec(doc: &TslDocument, api: &ApiDocument) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for case in &doc.cases {
        let count = seen.entry(case.id.as_str()).or_default();
        *count += 1;
        if *count == 2 {
            issues.push(issue(
                case,
                Severity::Error,
                IssueCode::DuplicateId,
                format!("id `{}` is used by more than one case", case.id),
            ));
        }
        check_case(case, api, &mut issues);
    }
    issues
}

fn issue(case: &TslCase, severity: Severity, code: IssueCode, message: String) -> ValidationIssue {
    ValidationIssue { case_id: case.id.clone(), severity, code, message }
}

fn check_case(case: &TslCase, api: &ApiDocument, issues: &mut Vec<ValidationIssue>) {
    if let Some(body) = &case.expected_response.body {
        check_matcher_leaves(case, body, "body", issues);
    }

    let candidates: Vec<&EndpointDef> =
        api.endpoints.iter().filter(|e| path_matches(&e.path, &case.endpoint)).collect();
    if candidates.is_empty() {
        issues.push(issue(
            case,
            Severity::Error,
            IssueCode::UnknownEndpoint,
            format!("endpoint `{}` is not declared", case.endpoint),
        ));
        return;
    }
    // an exact template match wins over a concrete-path match
    let endpoint = candidates.iter().filter(|e| e.method == case.method).min_by_key(|e| e.path != case.endpoint);
    let Some(endpoint) = endpoint else {
        let declared: Vec<&str> = candidates.iter().map(|e| e.method.as_str()).collect();
        issues.push(issue(
            case,
            Severity::Error,
            IssueCode::MethodMismatch,
            format!("{} is not declared on `{}` (declared: {})", case.method, case.endpoint, declared.join(", ")),
        ));
        return;
    };

    let status = case.expected_response.status_code;
    match endpoint.responses.get(&status) {
        None => {
            let declared: Vec<String> = endpoint.responses.keys().map(u16::to_string).collect();
            issues.push(issue(
                case,
                Severity::Error,
                IssueCode::UndeclaredStatus,
                format!(
                    "status {status} is not declared for {} {} (declared: {})",
                    endpoint.method,
                    endpoint.path,
                    declared.join(", ")
                ),
            ));
        }
        Some(schema) => {
            if let Some(body) = &case.expected_response.body {
                match schema {
                    Some(schema) => check_fields(case, api, body, schema, "body", issues),
                    None => issues.push(issue(
                        case,
                        Severity::Warning,
                        IssueCode::UnknownBodyField,
                        format!("no response schema declared for status {status}; body matchers unchecked"),
                    )),
                }
            }
        }
    }

    if (200..300).contains(&status) {
        check_required(case, api, endpoint, issues);
    }
}

fn check_matcher_leaves(case: &TslCase, matcher: &MatcherTree, path: &str, issues: &mut Vec<ValidationIssue>) {
    match matcher {
        MatcherTree::Exact(Value::String(s)) if s.starts_with(MATCHER_PREFIX) => {
            issues.push(issue(
                case,
                Severity::Error,
                IssueCode::MatcherSyntax,
                format!("{path}: literal `{s}` would be read as a matcher expression"),
            ));
        }
        MatcherTree::Exact(Value::Array(_) | Value::Object(_)) => issues.push(issue(
            case,
            Severity::Error,
            IssueCode::MatcherSyntax,
            format!("{path}: exact matchers must hold scalars"),
        )),
        MatcherTree::Object(fields) => {
            for (k, m) in fields {
                check_matcher_leaves(case, m, &format!("{path}.{k}"), issues);
            }
        }
        MatcherTree::Array(items) => {
            for (i, m) in items.iter().enumerate() {
                check_matcher_leaves(case, m, &format!("{path}[{i}]"), issues);
            }
        }
        _ => {}
    }
}

fn check_fields(
    case: &TslCase,
    api: &ApiDocument,
    matcher: &MatcherTree,
    schema: &SchemaNode,
    path: &str,
    issues: &mut Vec<ValidationIssue>,
) {
    let Some(schema) = api.resolve(schema) else {
        return;
    };
    match (matcher, schema.kind) {
        (MatcherTree::Object(fields), SchemaKind::Object) if !schema.properties.is_empty() => {
            for (name, child) in fields {
                match schema.properties.get(name) {
                    Some(prop) => check_fields(case, api, child, prop, &format!("{path}.{name}"), issues),
                    None => issues.push(issue(
                        case,
                        Severity::Error,
                        IssueCode::UnknownBodyField,
                        format!("{path}.{name} is not a property of the declared response"),
                    )),
                }
            }
        }
        (MatcherTree::Array(items), SchemaKind::Array) => {
            if let Some(item_schema) = &schema.items {
                for (i, m) in items.iter().enumerate() {
                    check_fields(case, api, m, item_schema, &format!("{path}[{i}]"), issues);
                }
            }
        }
        _ => {}
    }
}

fn check_required(case: &TslCase, api: &ApiDocument, endpoint: &EndpointDef, issues: &mut Vec<ValidationIssue>) {
    let Some(schema) = endpoint.request_schema.as_ref().and_then(|s| api.resolve(s)) else {
        return;
    };
    let provided = case.request_body.as_ref().and_then(Value::as_object);
    for field in &schema.constraints.required_fields {
        if !provided.is_some_and(|b| b.contains_key(field)) {
            issues.push(issue(
                case,
                Severity::Warning,
                IssueCode::MissingRequiredField,
                format!("required request field `{field}` is missing in a success case"),
            ));
        }
    }
}
