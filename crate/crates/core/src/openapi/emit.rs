use serde_json::{json, Map, Value};

use super::model::*;

/// Canonical OpenAPI 3.0 rendering of a parsed document.
///
/// Only what the model retains is written back; descriptions and
/// examples from the source document are gone by this point.
pub fn to_openapi_json(doc: &ApiDocument) -> Value {
    let mut paths = Map::new();
    for e in &doc.endpoints {
        let item = paths.entry(e.path.clone()).or_insert_with(|| Value::Object(Map::new()));
        item.as_object_mut().expect("path item is an object").insert(e.method.openapi_key().to_string(), operation(e));
    }

    let mut root = Map::new();
    root.insert("openapi".into(), json!("3.0.3"));
    root.insert("info".into(), json!({"title": doc.title, "version": doc.version}));
    if !doc.servers.is_empty() {
        let servers: Vec<Value> = doc.servers.iter().map(|u| json!({"url": u})).collect();
        root.insert("servers".into(), Value::Array(servers));
    }
    root.insert("paths".into(), Value::Object(paths));

    let mut components = Map::new();
    if !doc.shared_schemas.is_empty() {
        let schemas = doc.shared_schemas.iter().map(|(k, v)| (k.clone(), schema(v))).collect();
        components.insert("schemas".into(), Value::Object(schemas));
    }
    if !doc.schemes.is_empty() {
        let schemes = doc.schemes.iter().map(|(k, v)| (k.clone(), scheme(v))).collect();
        components.insert("securitySchemes".into(), Value::Object(schemes));
    }
    if !components.is_empty() {
        root.insert("components".into(), Value::Object(components));
    }
    Value::Object(root)
}

/// Pretty-printed [`to_openapi_json`].
pub fn to_openapi_text(doc: &ApiDocument) -> String {
    serde_json::to_string_pretty(&to_openapi_json(doc)).expect("JSON values always serialize")
}

fn operation(e: &EndpointDef) -> Value {
    let mut op = Map::new();
    if let Some(id) = &e.operation_id {
        op.insert("operationId".into(), json!(id));
    }
    if !e.tags.is_empty() {
        op.insert("tags".into(), json!(e.tags));
    }
    if !e.parameters.is_empty() {
        let params: Vec<Value> = e
            .parameters
            .iter()
            .map(|p| {
                json!({
                    "name": p.name,
                    "in": p.location.as_str(),
                    "required": p.required,
                    "schema": schema(&p.schema),
                })
            })
            .collect();
        op.insert("parameters".into(), Value::Array(params));
    }
    if let Some(body) = &e.request_schema {
        op.insert(
            "requestBody".into(),
            json!({"required": true, "content": {"application/json": {"schema": schema(body)}}}),
        );
    }
    let mut responses = Map::new();
    for (status, body) in &e.responses {
        let mut r = Map::new();
        r.insert("description".into(), json!(""));
        if let Some(body) = body {
            r.insert("content".into(), json!({"application/json": {"schema": schema(body)}}));
        }
        responses.insert(status.to_string(), Value::Object(r));
    }
    op.insert("responses".into(), Value::Object(responses));
    if !e.security.is_empty() {
        let reqs: Vec<Value> = e.security.iter().map(|s| json!({ s: [] })).collect();
        op.insert("security".into(), Value::Array(reqs));
    }
    Value::Object(op)
}

fn schema(node: &SchemaNode) -> Value {
    let mut out = Map::new();
    if node.kind == SchemaKind::Ref {
        let name = node.ref_name.as_deref().unwrap_or_default();
        out.insert("$ref".into(), json!(format!("#/components/schemas/{name}")));
        return Value::Object(out);
    }
    out.insert("type".into(), json!(node.kind.as_str()));
    let c = &node.constraints;
    if let Some(v) = c.format.as_ref() {
        out.insert("format".into(), json!(v));
    }
    if !c.required_fields.is_empty() {
        out.insert("required".into(), json!(c.required_fields));
    }
    if let Some(v) = c.min_length {
        out.insert("minLength".into(), json!(v));
    }
    if let Some(v) = c.max_length {
        out.insert("maxLength".into(), json!(v));
    }
    if let Some(v) = c.pattern.as_ref() {
        out.insert("pattern".into(), json!(v));
    }
    if let Some(v) = c.minimum {
        out.insert("minimum".into(), json!(v));
    }
    if let Some(v) = c.maximum {
        out.insert("maximum".into(), json!(v));
    }
    if let Some(v) = c.enum_values.as_ref() {
        out.insert("enum".into(), Value::Array(v.clone()));
    }
    if !node.properties.is_empty() {
        let props = node.properties.iter().map(|(k, v)| (k.clone(), schema(v))).collect();
        out.insert("properties".into(), Value::Object(props));
    }
    if let Some(items) = &node.items {
        out.insert("items".into(), schema(items));
    }
    Value::Object(out)
}

fn scheme(s: &SecurityScheme) -> Value {
    let mut out = Map::new();
    out.insert("type".into(), json!(s.kind));
    if let Some(v) = &s.scheme {
        out.insert("scheme".into(), json!(v));
    }
    if let Some(v) = &s.param_name {
        out.insert("name".into(), json!(v));
    }
    if let Some(v) = &s.location {
        out.insert("in".into(), json!(v));
    }
    Value::Object(out)
}
