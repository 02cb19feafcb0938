use std::collections::BTreeMap;

use indexmap::IndexMap;
use serde_json::{Map, Value};

use super::model::*;
use super::OpenApiError;

const SCHEMA_PREFIX: &str = "#/components/schemas/";
const MAX_INLINE_DEPTH: usize = 32;

/// Parses an OpenAPI 3.x document given as JSON or YAML text.
pub fn parse_openapi(document_text: &str) -> Result<ApiDocument, OpenApiError> {
    let root = parse_tree(document_text)?;
    Parser::new(&root).document()
}

pub(crate) fn parse_tree(text: &str) -> Result<Value, OpenApiError> {
    let trimmed = text.trim_start();
    let value = if trimmed.starts_with('{') {
        serde_json::from_str::<Value>(text)
            .map_err(|e| OpenApiError::MalformedDocument(format!("invalid JSON: {e}")))?
    } else {
        serde_yaml::from_str::<Value>(text)
            .map_err(|e| OpenApiError::MalformedDocument(format!("invalid YAML: {e}")))?
    };
    if !value.is_object() {
        return Err(OpenApiError::MalformedDocument("top level must be a mapping".into()));
    }
    Ok(value)
}

/// Copies the validation keywords of a raw JSON-schema object.
///
/// Keywords that are absent (or carry the wrong JSON type) stay unset.
pub fn extract_constraints(schema: &Value) -> ConstraintSet {
    let as_u64 = |key: &str| schema.get(key).and_then(Value::as_u64);
    let as_f64 = |key: &str| schema.get(key).and_then(Value::as_f64);
    let required_fields = schema
        .get("required")
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(Value::as_str).map(str::to_string).collect())
        .unwrap_or_default();
    ConstraintSet {
        required_fields,
        min_length: as_u64("minLength"),
        max_length: as_u64("maxLength"),
        pattern: schema.get("pattern").and_then(Value::as_str).map(str::to_string),
        minimum: as_f64("minimum"),
        maximum: as_f64("maximum"),
        enum_values: schema.get("enum").and_then(Value::as_array).cloned(),
        format: schema.get("format").and_then(Value::as_str).map(str::to_string),
    }
}

struct Parser<'a> {
    root: &'a Value,
    schemas: Option<&'a Map<String, Value>>,
    warnings: Vec<String>,
}

impl<'a> Parser<'a> {
    fn new(root: &'a Value) -> Self {
        let schemas = root.pointer("/components/schemas").and_then(Value::as_object);
        Parser { root, schemas, warnings: Vec::new() }
    }

    fn document(mut self) -> Result<ApiDocument, OpenApiError> {
        self.check_version()?;
        let info = self.root.get("info");
        let text_at = |v: Option<&Value>, key: &str| {
            v.and_then(|v| v.get(key)).and_then(Value::as_str).unwrap_or_default().to_string()
        };
        let title = text_at(info, "title");
        let version = text_at(info, "version");
        let servers = self
            .root
            .get("servers")
            .and_then(Value::as_array)
            .map(|a| a.iter().filter_map(|s| s.get("url").and_then(Value::as_str)).map(str::to_string).collect())
            .unwrap_or_default();

        let mut schemes = IndexMap::new();
        if let Some(map) = self.root.pointer("/components/securitySchemes").and_then(Value::as_object) {
            for (name, raw) in map {
                let raw = self.deref(raw)?;
                schemes.insert(name.clone(), security_scheme(raw));
            }
        }

        let mut shared_schemas = IndexMap::new();
        if let Some(map) = self.schemas {
            for (name, raw) in map {
                let node = self.schema(raw, 0)?;
                shared_schemas.insert(name.clone(), node);
            }
        }

        let mut endpoints = Vec::new();
        if let Some(paths) = self.root.get("paths") {
            let paths =
                paths.as_object().ok_or_else(|| OpenApiError::MalformedDocument("`paths` must be a mapping".into()))?;
            for (path, item) in paths {
                let item = self.deref(item)?;
                for method in HttpMethod::ALL {
                    if let Some(op) = item.get(method.openapi_key()) {
                        endpoints.push(self.endpoint(path, method, item, op, &schemes)?);
                    }
                }
            }
        }

        let doc = ApiDocument { title, version, servers, endpoints, schemes, shared_schemas, warnings: self.warnings };
        doc.check_invariants()?;
        Ok(doc)
    }

    fn check_version(&self) -> Result<(), OpenApiError> {
        if self.root.get("swagger").is_some() {
            return Err(OpenApiError::MalformedDocument(
                "Swagger/OpenAPI 2.x documents are not supported; expected OpenAPI 3.x".into(),
            ));
        }
        match self.root.get("openapi") {
            Some(Value::String(v)) if v.starts_with("3.") => Ok(()),
            Some(Value::Number(n)) if n.as_f64().is_some_and(|f| (3.0..4.0).contains(&f)) => Ok(()),
            Some(other) => Err(OpenApiError::MalformedDocument(format!("unsupported OpenAPI version {other}"))),
            None => Err(OpenApiError::MalformedDocument("missing `openapi` version field".into())),
        }
    }

    /// Resolves a non-schema `$ref` (parameters, request bodies, responses).
    fn deref(&self, mut value: &'a Value) -> Result<&'a Value, OpenApiError> {
        for _ in 0..MAX_INLINE_DEPTH {
            let Some(reference) = value.get("$ref").and_then(Value::as_str) else {
                return Ok(value);
            };
            value = self.pointer(reference)?;
        }
        Err(OpenApiError::UnresolvableRef("reference cycle".into()))
    }

    fn pointer(&self, reference: &str) -> Result<&'a Value, OpenApiError> {
        reference
            .strip_prefix('#')
            .and_then(|p| self.root.pointer(p))
            .ok_or_else(|| OpenApiError::UnresolvableRef(reference.to_string()))
    }

    fn endpoint(
        &mut self,
        path: &str,
        method: HttpMethod,
        item: &'a Value,
        op: &'a Value,
        schemes: &IndexMap<String, SecurityScheme>,
    ) -> Result<EndpointDef, OpenApiError> {
        let label = format!("{method} {path}");
        let operation_id = op.get("operationId").and_then(Value::as_str).map(str::to_string);
        let tags = op
            .get("tags")
            .and_then(Value::as_array)
            .map(|a| a.iter().filter_map(Value::as_str).map(str::to_string).collect())
            .unwrap_or_default();

        let mut parameters: Vec<ParamDef> = Vec::new();
        let raw_params = item
            .get("parameters")
            .and_then(Value::as_array)
            .into_iter()
            .flatten()
            .chain(op.get("parameters").and_then(Value::as_array).into_iter().flatten());
        for raw in raw_params {
            let raw = self.deref(raw)?;
            let Some(param) = self.parameter(raw)? else {
                continue;
            };
            // operation-level parameters override path-level ones
            if let Some(existing) = parameters.iter_mut().find(|p| p.name == param.name && p.location == param.location)
            {
                *existing = param;
            } else {
                parameters.push(param);
            }
        }
        for name in template_params(path) {
            let declared = parameters.iter().any(|p| p.location == ParamLocation::Path && p.name == name);
            if !declared {
                self.warnings.push(format!("{label}: path parameter `{name}` undeclared; assuming required string"));
                parameters.push(ParamDef {
                    name: name.to_string(),
                    location: ParamLocation::Path,
                    required: true,
                    schema: SchemaNode::of_kind(SchemaKind::String),
                });
            }
        }

        let request_schema = match op.get("requestBody") {
            Some(body) => {
                let body = self.deref(body)?;
                match json_media(body) {
                    Some(raw) => Some(self.schema(raw, 0)?),
                    None => None,
                }
            }
            None => None,
        };

        let mut responses = BTreeMap::new();
        if let Some(map) = op.get("responses").and_then(Value::as_object) {
            for (code, raw) in map {
                let Ok(status) = code.parse::<u16>() else {
                    self.warnings.push(format!("{label}: response key `{code}` ignored"));
                    continue;
                };
                if !(100..=599).contains(&status) {
                    return Err(OpenApiError::MalformedDocument(format!("{label}: status {status} outside 100-599")));
                }
                let raw = self.deref(raw)?;
                let schema = match json_media(raw) {
                    Some(s) => Some(self.schema(s, 0)?),
                    None => None,
                };
                responses.insert(status, schema);
            }
        }
        if responses.is_empty() {
            return Err(OpenApiError::MalformedDocument(format!("{label}: no numeric responses declared")));
        }

        let requirements = op.get("security").or_else(|| self.root.get("security"));
        let mut security: Vec<String> = Vec::new();
        for req in requirements.and_then(Value::as_array).into_iter().flatten() {
            for name in req.as_object().into_iter().flat_map(|m| m.keys()) {
                if !schemes.contains_key(name) {
                    self.warnings.push(format!("{label}: security scheme `{name}` is not declared"));
                }
                if !security.contains(name) {
                    security.push(name.clone());
                }
            }
        }

        Ok(EndpointDef {
            path: path.to_string(),
            method,
            operation_id,
            tags,
            parameters,
            request_schema,
            responses,
            security,
        })
    }

    fn parameter(&mut self, raw: &Value) -> Result<Option<ParamDef>, OpenApiError> {
        let name = raw
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| OpenApiError::MalformedDocument("parameter without a name".into()))?;
        let location = match raw.get("in").and_then(Value::as_str) {
            Some("path") => ParamLocation::Path,
            Some("query") => ParamLocation::Query,
            Some("header") => ParamLocation::Header,
            _ => return Ok(None),
        };
        let schema = match raw.get("schema") {
            Some(s) => self.schema(s, 0)?,
            None => SchemaNode::of_kind(SchemaKind::String),
        };
        let required = location == ParamLocation::Path || raw.get("required").and_then(Value::as_bool).unwrap_or(false);
        Ok(Some(ParamDef { name: name.to_string(), location, required, schema }))
    }

    fn schema(&mut self, raw: &Value, depth: usize) -> Result<SchemaNode, OpenApiError> {
        if depth > MAX_INLINE_DEPTH {
            return Err(OpenApiError::MalformedDocument("schema nesting too deep".into()));
        }
        if let Some(reference) = raw.get("$ref").and_then(Value::as_str) {
            if let Some(name) = reference.strip_prefix(SCHEMA_PREFIX) {
                if self.schemas.is_some_and(|m| m.contains_key(name)) {
                    return Ok(SchemaNode::reference(name));
                }
                return Err(OpenApiError::UnresolvableRef(reference.to_string()));
            }
            let target = self.pointer(reference)?;
            return self.schema(target, depth + 1);
        }
        if let Some(parts) = raw.get("allOf").and_then(Value::as_array) {
            return self.merge_all_of(raw, parts, depth);
        }
        for key in ["oneOf", "anyOf"] {
            if let Some(first) = raw.get(key).and_then(Value::as_array).and_then(|a| a.first()) {
                self.warnings.push(format!("`{key}` collapsed to its first variant"));
                return self.schema(first, depth + 1);
            }
        }

        let kind = schema_kind(raw);
        let mut node = SchemaNode::of_kind(kind);
        node.constraints = extract_constraints(raw);
        match kind {
            SchemaKind::Object => {
                if let Some(props) = raw.get("properties").and_then(Value::as_object) {
                    for (name, child) in props {
                        let child = self.schema(child, depth + 1)?;
                        node.properties.insert(name.clone(), child);
                    }
                }
            }
            SchemaKind::Array => {
                let items = match raw.get("items") {
                    Some(items) => self.schema(items, depth + 1)?,
                    None => SchemaNode::of_kind(SchemaKind::Object),
                };
                node.items = Some(Box::new(items));
            }
            _ => {}
        }
        node.constraints.check().map_err(OpenApiError::MalformedDocument)?;
        Ok(node)
    }

    /// Shallow `allOf` merge: properties are unioned (later parts win),
    /// required lists are unioned, and scalar constraints take the last value set.
    fn merge_all_of(&mut self, raw: &Value, parts: &[Value], depth: usize) -> Result<SchemaNode, OpenApiError> {
        let mut own = raw.clone();
        if let Some(map) = own.as_object_mut() {
            map.remove("allOf");
        }
        let mut merged: Option<SchemaNode> = None;
        let mut concrete = Vec::with_capacity(parts.len() + 1);
        for part in parts {
            concrete.push(self.concrete(part, depth + 1)?);
        }
        if own.as_object().is_some_and(|m| !m.is_empty()) {
            concrete.push(self.schema(&own, depth + 1)?);
        }
        for part in concrete {
            merged = Some(match merged {
                None => part,
                Some(mut acc) => {
                    if part.kind == SchemaKind::Object || !part.properties.is_empty() {
                        acc.kind = SchemaKind::Object;
                    }
                    acc.properties.extend(part.properties);
                    let c = part.constraints;
                    acc.constraints.required_fields.extend(c.required_fields);
                    macro_rules! take {
                        ($f:ident) => {
                            if c.$f.is_some() {
                                acc.constraints.$f = c.$f;
                            }
                        };
                    }
                    take!(min_length);
                    take!(max_length);
                    take!(pattern);
                    take!(minimum);
                    take!(maximum);
                    take!(enum_values);
                    take!(format);
                    if part.items.is_some() {
                        acc.items = part.items;
                    }
                    acc
                }
            });
        }
        Ok(merged.unwrap_or_else(|| SchemaNode::of_kind(SchemaKind::Object)))
    }

    /// Like `schema`, but a `$ref` to a shared schema is expanded one level.
    fn concrete(&mut self, raw: &Value, depth: usize) -> Result<SchemaNode, OpenApiError> {
        if let Some(reference) = raw.get("$ref").and_then(Value::as_str) {
            let target = self.pointer(reference)?;
            return self.schema(target, depth + 1);
        }
        self.schema(raw, depth)
    }
}

fn schema_kind(raw: &Value) -> SchemaKind {
    let declared = match raw.get("type") {
        Some(Value::String(t)) => Some(t.as_str()),
        Some(Value::Array(types)) => types.iter().filter_map(Value::as_str).find(|t| *t != "null"),
        _ => None,
    };
    match declared {
        Some("string") => SchemaKind::String,
        Some("number") => SchemaKind::Number,
        Some("integer") => SchemaKind::Integer,
        Some("boolean") => SchemaKind::Boolean,
        Some("array") => SchemaKind::Array,
        Some("object") => SchemaKind::Object,
        _ if raw.get("items").is_some() => SchemaKind::Array,
        _ if raw.get("enum").is_some() => SchemaKind::String,
        _ => SchemaKind::Object,
    }
}

fn security_scheme(raw: &Value) -> SecurityScheme {
    let text = |key: &str| raw.get(key).and_then(Value::as_str).map(str::to_string);
    SecurityScheme {
        kind: text("type").unwrap_or_default(),
        scheme: text("scheme").map(|s| s.to_ascii_lowercase()),
        param_name: text("name"),
        location: text("in"),
    }
}

/// The `application/json` schema of a request body or response object.
fn json_media(holder: &Value) -> Option<&Value> {
    let content = holder.get("content")?.as_object()?;
    content.iter().find_map(|(media, body)| {
        let essence = media.split(';').next().unwrap_or_default().trim();
        if essence.eq_ignore_ascii_case("application/json") {
            body.get("schema")
        } else {
            None
        }
    })
}
