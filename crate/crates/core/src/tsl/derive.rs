//! Category-Partition derivation of baseline TSL cases.
//!
//! Every endpoint is a category; the choices are one nominal frame plus one
//! error frame per constraint of the request (missing required field,
//! length/range/pattern/enum violation) and an unauthenticated frame for
//! secured endpoints. No randomness is involved: equal inputs give equal output.

use indexmap::IndexMap;
use serde_json::{json, Map, Number, Value};

use super::model::*;
use super::sample::{sample_matching, sample_violating};
use crate::openapi::{ApiDocument, EndpointDef, ParamDef, ParamLocation, SchemaKind, SchemaNode};

const MAX_NOMINAL_DEPTH: usize = 8;
const LOGIN_HINTS: [&str; 6] = ["login", "token", "signin", "sign-in", "session", "auth"];

/// Derives one TSL document covering every endpoint of `api`.
pub fn derive_cases_cp(api: &ApiDocument) -> TslDocument {
    let mut deriver = Deriver { api, cases: Vec::new() };
    for (index, endpoint) in api.endpoints.iter().enumerate() {
        deriver.endpoint(index, endpoint);
    }
    TslDocument::new(deriver.cases)
}

/// Status expected for constraint violations on `endpoint`.
pub fn error_status(endpoint: &EndpointDef) -> u16 {
    if endpoint.responses.contains_key(&422) {
        422
    } else {
        400
    }
}

struct Deriver<'a> {
    api: &'a ApiDocument,
    cases: Vec<TslCase>,
}

/// Inputs shared by every frame of one endpoint.
#[derive(Clone)]
struct Frame {
    path_params: Option<ParamMap>,
    query_params: Option<ParamMap>,
    headers: Option<ParamMap>,
    auth_headers: Vec<String>,
    body: Option<Value>,
    preconditions: Vec<String>,
}

impl<'a> Deriver<'a> {
    fn endpoint(&mut self, index: usize, endpoint: &EndpointDef) {
        let subject = subject(endpoint);
        let frame = self.nominal_frame(index, endpoint);
        let err = error_status(endpoint);

        if let Some(status) = endpoint.success_status() {
            let body = endpoint.responses.get(&status).and_then(Option::as_ref).and_then(|s| self.response_matcher(s));
            self.push(
                endpoint,
                format!("{subject} Valid Request Returns {status}"),
                frame.clone(),
                ExpectedResponse { status_code: status, body },
            );
        }

        if let (Some(schema), Some(Value::Object(nominal))) =
            (endpoint.request_schema.as_ref().and_then(|s| self.api.resolve(s)), frame.body.as_ref())
        {
            if schema.kind == SchemaKind::Object {
                for field in &schema.constraints.required_fields {
                    if !nominal.contains_key(field) {
                        continue;
                    }
                    let mut body = nominal.clone();
                    body.shift_remove(field);
                    self.push_body(
                        endpoint,
                        &frame,
                        format!("{subject} Missing {} Returns {err}", title(field)),
                        Value::Object(body),
                        err,
                    );
                }
                for (field, prop) in &schema.properties {
                    let Some(prop) = self.api.resolve(prop) else { continue };
                    for (label, value) in violations(prop) {
                        let mut body = nominal.clone();
                        body.insert(field.clone(), value);
                        self.push_body(
                            endpoint,
                            &frame,
                            format!("{subject} {} {label} Returns {err}", title(field)),
                            Value::Object(body),
                            err,
                        );
                    }
                }
            }
        }

        for param in endpoint.params_in(ParamLocation::Query) {
            let Some(schema) = self.api.resolve(&param.schema) else { continue };
            let mut frames = Vec::new();
            if param.required {
                let mut f = frame.clone();
                if let Some(q) = f.query_params.as_mut() {
                    q.shift_remove(&param.name);
                }
                frames.push((format!("Missing Query {}", title(&param.name)), f));
            }
            for (label, value) in violations(schema) {
                let mut f = frame.clone();
                f.query_params.get_or_insert_with(IndexMap::new).insert(param.name.clone(), value);
                frames.push((format!("Query {} {label}", title(&param.name)), f));
            }
            for (label, f) in frames {
                self.push(endpoint, format!("{subject} {label} Returns {err}"), f, ExpectedResponse::status(err));
            }
        }

        if !endpoint.security.is_empty() {
            let mut f = frame.clone();
            if let Some(h) = f.headers.as_mut() {
                for name in &frame.auth_headers {
                    h.shift_remove(name);
                }
                if h.is_empty() {
                    f.headers = None;
                }
            }
            self.push(endpoint, format!("{subject} Without Credentials Returns 401"), f, ExpectedResponse::status(401));
        }
    }

    fn push_body(&mut self, endpoint: &EndpointDef, frame: &Frame, name: String, body: Value, status: u16) {
        let mut f = frame.clone();
        f.body = Some(body);
        self.push(endpoint, name, f, ExpectedResponse::status(status));
    }

    fn push(&mut self, endpoint: &EndpointDef, name: String, frame: Frame, expected: ExpectedResponse) {
        let id = format!("TC{}", self.cases.len() + 1);
        self.cases.push(TslCase {
            id,
            group: endpoint.primary_tag().to_string(),
            name,
            endpoint: endpoint.path.clone(),
            method: endpoint.method,
            preconditions: frame.preconditions,
            path_params: frame.path_params,
            query_params: frame.query_params,
            headers: frame.headers,
            request_body: frame.body,
            expected_response: expected,
        });
    }

    fn nominal_frame(&self, index: usize, endpoint: &EndpointDef) -> Frame {
        let params = |location: ParamLocation, only_required: bool| -> Option<ParamMap> {
            let map: ParamMap = endpoint
                .params_in(location)
                .filter(|p| p.required || !only_required)
                .map(|p| (p.name.clone(), self.param_value(index, p)))
                .collect();
            (!map.is_empty()).then_some(map)
        };
        let path_params = params(ParamLocation::Path, false);
        let query_params = params(ParamLocation::Query, true);
        let mut headers = params(ParamLocation::Header, true);

        let mut auth_headers = Vec::new();
        for name in &endpoint.security {
            let Some(scheme) = self.api.schemes.get(name) else { continue };
            let (header, value) = match (scheme.kind.as_str(), scheme.scheme.as_deref()) {
                ("http", Some("basic")) => ("Authorization".to_string(), "Basic {{credentials}}".to_string()),
                ("apiKey", _) if scheme.location.as_deref() == Some("header") => {
                    (scheme.param_name.clone().unwrap_or_else(|| "X-API-Key".into()), "{{api_key}}".to_string())
                }
                ("apiKey", _) => continue,
                _ => ("Authorization".to_string(), "Bearer {{token}}".to_string()),
            };
            if !auth_headers.contains(&header) {
                headers.get_or_insert_with(IndexMap::new).insert(header.clone(), Value::String(value));
                auth_headers.push(header);
            }
        }

        let body = endpoint.request_schema.as_ref().map(|s| self.nominal(index, s, 0));

        let mut preconditions = Vec::new();
        if let Some(pp) = &path_params {
            let mut path = endpoint.path.clone();
            for (k, v) in pp {
                let v = match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                path = path.replace(&format!("{{{k}}}"), &v);
            }
            if endpoint.method != crate::openapi::HttpMethod::Post {
                preconditions.push(format!("Resource {path} exists"));
            }
        }
        let lower = endpoint.path.to_ascii_lowercase();
        if LOGIN_HINTS.iter().any(|h| lower.contains(h)) {
            if let Some(Value::Object(b)) = &body {
                for key in ["email", "username", "userName"] {
                    if let Some(Value::String(v)) = b.get(key) {
                        let noun = if key == "email" { "email" } else { "username" };
                        preconditions.push(format!("User with {noun} '{v}' exists"));
                        break;
                    }
                }
            }
        }

        Frame { path_params, query_params, headers, auth_headers, body, preconditions }
    }

    fn param_value(&self, index: usize, param: &ParamDef) -> Value {
        self.nominal(index, &param.schema, 0)
    }

    fn nominal(&self, index: usize, schema: &SchemaNode, depth: usize) -> Value {
        let Some(schema) = self.api.resolve(schema) else {
            return Value::Null;
        };
        let c = &schema.constraints;
        if let Some(first) = c.enum_values.as_ref().and_then(|e| e.first()) {
            return first.clone();
        }
        match schema.kind {
            SchemaKind::String => Value::String(nominal_string(index, schema)),
            SchemaKind::Integer => number(nominal_number(c.minimum, c.maximum, true)),
            SchemaKind::Number => number(nominal_number(c.minimum, c.maximum, false)),
            SchemaKind::Boolean => Value::Bool(true),
            SchemaKind::Array => match (&schema.items, depth < MAX_NOMINAL_DEPTH) {
                (Some(items), true) => Value::Array(vec![self.nominal(index, items, depth + 1)]),
                _ => Value::Array(Vec::new()),
            },
            SchemaKind::Object => {
                let mut map = Map::new();
                if depth < MAX_NOMINAL_DEPTH {
                    for (name, prop) in &schema.properties {
                        map.insert(name.clone(), self.nominal(index, prop, depth + 1));
                    }
                }
                Value::Object(map)
            }
            SchemaKind::Ref => Value::Null,
        }
    }

    fn response_matcher(&self, schema: &SchemaNode) -> Option<MatcherTree> {
        let schema = self.api.resolve(schema)?;
        match schema.kind {
            SchemaKind::Object if !schema.properties.is_empty() => {
                let fields = schema
                    .properties
                    .iter()
                    .filter_map(|(name, prop)| {
                        let kind = self.api.resolve(prop).and_then(|p| json_kind(p.kind))?;
                        Some((name.clone(), MatcherTree::TypeIs(kind)))
                    })
                    .collect();
                Some(MatcherTree::Object(fields))
            }
            SchemaKind::Object => None,
            kind => json_kind(kind).map(MatcherTree::TypeIs),
        }
    }
}

fn json_kind(kind: SchemaKind) -> Option<JsonKind> {
    Some(match kind {
        SchemaKind::String => JsonKind::String,
        SchemaKind::Number => JsonKind::Number,
        SchemaKind::Integer => JsonKind::Integer,
        SchemaKind::Boolean => JsonKind::Boolean,
        SchemaKind::Array => JsonKind::Array,
        SchemaKind::Object => JsonKind::Object,
        SchemaKind::Ref => return None,
    })
}

fn number(v: f64) -> Value {
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        json!(v as i64)
    } else {
        Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
    }
}

fn nominal_number(min: Option<f64>, max: Option<f64>, integer: bool) -> f64 {
    let (lo, hi) = if integer { (min.map(f64::ceil), max.map(f64::floor)) } else { (min, max) };
    let v = match (lo, hi) {
        (Some(lo), Some(hi)) => (lo + hi) / 2.0,
        (Some(lo), None) => lo.max(1.0),
        (None, Some(hi)) => hi.min(1.0),
        (None, None) => 1.0,
    };
    if integer {
        v.floor()
    } else {
        v
    }
}

fn nominal_string(index: usize, schema: &SchemaNode) -> String {
    let c = &schema.constraints;
    let fallback = || "a".repeat(c.min_length.unwrap_or(1).max(1) as usize);
    match c.format.as_deref() {
        Some("email") => return format!("user{}@example.com", index + 1),
        Some("date-time") => return "2025-01-01T00:00:00Z".into(),
        Some("date") => return "2025-01-01".into(),
        Some("uuid") => return "3fa85f64-5717-4562-b3fc-2c963f66afa6".into(),
        Some("uri") | Some("url") => return "https://example.com/resource".into(),
        _ => {}
    }
    match &c.pattern {
        Some(p) => sample_matching(p, c.min_length, c.max_length).unwrap_or_else(fallback),
        None => fallback(),
    }
}

/// Error choices for a single field: `(label, offending value)`.
fn violations(schema: &SchemaNode) -> Vec<(String, Value)> {
    let c = &schema.constraints;
    let mut out = Vec::new();
    match schema.kind {
        SchemaKind::String => {
            let sized = |len: u64| -> String {
                c.pattern
                    .as_deref()
                    .and_then(|p| sample_matching(p, Some(len), Some(len)))
                    .unwrap_or_else(|| "a".repeat(len as usize))
            };
            if let Some(min) = c.min_length.filter(|m| *m >= 1) {
                out.push((format!("Length {} Below Min", min - 1), json!(sized(min - 1))));
            }
            if let Some(max) = c.max_length {
                out.push((format!("Length {} Above Max", max + 1), json!(sized(max + 1))));
            }
            if let Some(pattern) = &c.pattern {
                let len = c.min_length.unwrap_or(1).max(1);
                if let Some(bad) = sample_violating(pattern, len) {
                    out.push(("Pattern Violation".into(), json!(bad)));
                }
            }
        }
        SchemaKind::Integer | SchemaKind::Number => {
            let step = 1.0;
            if let Some(min) = c.minimum {
                out.push(("Below Minimum".into(), number(min - step)));
            }
            if let Some(max) = c.maximum {
                out.push(("Above Maximum".into(), number(max + step)));
            }
        }
        _ => {}
    }
    if let Some(values) = c.enum_values.as_ref().filter(|v| !v.is_empty()) {
        let mut candidate = "INVALID".to_string();
        while values.iter().any(|v| v.as_str() == Some(candidate.as_str())) {
            candidate.push('_');
        }
        let bad = if values.iter().all(Value::is_number) {
            let top = values.iter().filter_map(Value::as_f64).fold(f64::MIN, f64::max);
            number(top + 1.0)
        } else {
            Value::String(candidate)
        };
        out.push(("Enum Violation".into(), bad));
    }
    out
}

/// Human-readable subject for case names: the operation id split into
/// words, or the method and literal path segments.
fn subject(endpoint: &EndpointDef) -> String {
    match &endpoint.operation_id {
        Some(id) => title(id),
        None => {
            let mut words = vec![title(&endpoint.method.as_str().to_ascii_lowercase())];
            words.extend(endpoint.path.split('/').filter(|s| !s.is_empty() && !s.starts_with('{')).map(title));
            words.join(" ")
        }
    }
}

/// `refreshToken` / `refresh_token` / `refresh-token` → `Refresh Token`.
pub(crate) fn title(s: &str) -> String {
    let mut words: Vec<String> = Vec::new();
    let mut current = String::new();
    let mut prev_lower = false;
    for ch in s.chars() {
        if !ch.is_alphanumeric() {
            if !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
            prev_lower = false;
            continue;
        }
        if ch.is_uppercase() && prev_lower && !current.is_empty() {
            words.push(std::mem::take(&mut current));
        }
        prev_lower = ch.is_lowercase() || ch.is_ascii_digit();
        current.push(ch);
    }
    if !current.is_empty() {
        words.push(current);
    }
    words
        .into_iter()
        .map(|w| {
            let mut chars = w.chars();
            match chars.next() {
                Some(first) => first.to_uppercase().chain(chars).collect(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::openapi::parse_openapi;
    use crate::tsl::serialize_tsl;

    #[test]
    fn titles() {
        assert_eq!(title("refreshToken"), "Refresh Token");
        assert_eq!(title("create_user"), "Create User");
        assert_eq!(title("get-todo-by-id"), "Get Todo By Id");
    }

    #[test]
    fn nominal_numbers() {
        assert_eq!(nominal_number(Some(1.0), Some(10.0), true), 5.0);
        assert_eq!(nominal_number(Some(5.0), None, true), 5.0);
        assert_eq!(nominal_number(None, Some(0.0), true), 0.0);
        assert_eq!(nominal_number(None, None, false), 1.0);
        assert_eq!(nominal_number(Some(0.5), Some(1.0), false), 0.75);
    }

    const SPEC: &str = r##"
openapi: 3.0.0
info: {title: x, version: "1"}
paths:
  /users:
    post:
      operationId: createUser
      tags: [Users]
      requestBody:
        content:
          application/json:
            schema:
              type: object
              required: [email]
              properties:
                email: {type: string, format: email}
                role: {type: string, enum: [admin, user]}
                age: {type: integer, minimum: 18, maximum: 130}
      responses:
        "201": {description: created}
        "422": {description: invalid}
  /users/{id}:
    get:
      tags: [Users]
      parameters:
        - {name: id, in: path, required: true, schema: {type: integer, minimum: 1}}
        - {name: fields, in: query, required: true, schema: {type: string, maxLength: 20}}
      security: [{bearer: []}]
      responses:
        "200":
          description: ok
          content:
            application/json:
              schema:
                type: object
                properties: {id: {type: integer}, email: {type: string}}
        "400": {description: bad}
components:
  securitySchemes: {bearer: {type: http, scheme: bearer}}
"##;

    #[test]
    fn derived_cases_cover_the_constraints() {
        let api = parse_openapi(SPEC).unwrap();
        let doc = derive_cases_cp(&api);
        let names: Vec<(&str, &str, u16)> =
            doc.cases.iter().map(|c| (c.id.as_str(), c.name.as_str(), c.expected_response.status_code)).collect();
        assert_eq!(
            names,
            vec![
                ("TC1", "Create User Valid Request Returns 201", 201),
                ("TC2", "Create User Missing Email Returns 422", 422),
                ("TC3", "Create User Role Enum Violation Returns 422", 422),
                ("TC4", "Create User Age Below Minimum Returns 422", 422),
                ("TC5", "Create User Age Above Maximum Returns 422", 422),
                ("TC6", "Get Users Valid Request Returns 200", 200),
                ("TC7", "Get Users Missing Query Fields Returns 400", 400),
                ("TC8", "Get Users Query Fields Length 21 Above Max Returns 400", 400),
                ("TC9", "Get Users Without Credentials Returns 401", 401),
            ]
        );
        let nominal = doc.cases[0].request_body.as_ref().unwrap();
        assert_eq!(nominal, &json!({"email": "user1@example.com", "role": "admin", "age": 74}));
        let get = &doc.cases[5];
        assert_eq!(get.preconditions, vec!["Resource /users/1 exists"]);
        assert_eq!(get.headers.as_ref().unwrap()["Authorization"], json!("Bearer {{token}}"));
        assert!(doc.cases[8].headers.is_none());
        assert_eq!(serialize_tsl(&doc), serialize_tsl(&derive_cases_cp(&api)));
    }
}
