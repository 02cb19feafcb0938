//! The subset of OpenAPI 3.x needed to drive test generation.
//!
//! Documents are parsed into an [`ApiDocument`], can be partitioned by tag
//! with [`slice_by_tag`], and written back out as canonical OpenAPI JSON with
//! [`to_openapi_json`] for embedding into prompts.

mod emit;
mod model;
mod parse;

use std::collections::HashSet;

pub use emit::{to_openapi_json, to_openapi_text};
pub use model::*;
pub use parse::{extract_constraints, parse_openapi};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OpenApiError {
    #[error("malformed OpenAPI document: {0}")]
    MalformedDocument(String),
    #[error("unresolvable reference `{0}`")]
    UnresolvableRef(String),
    #[error("duplicate endpoint {method} {path}")]
    DuplicateEndpoint { method: HttpMethod, path: String },
    #[error("unknown tag `{0}`")]
    UnknownTag(String),
}

/// Distinct tags in first-appearance order; untagged endpoints count as [`UNTAGGED`].
pub fn list_tags(doc: &ApiDocument) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for endpoint in &doc.endpoints {
        let tags: Vec<&str> =
            if endpoint.tags.is_empty() { vec![UNTAGGED] } else { endpoint.tags.iter().map(String::as_str).collect() };
        for tag in tags {
            if seen.insert(tag) {
                out.push(tag.to_string());
            }
        }
    }
    out
}

fn carries_tag(endpoint: &EndpointDef, tag: &str) -> bool {
    if endpoint.tags.is_empty() {
        tag == UNTAGGED
    } else {
        endpoint.tags.iter().any(|t| t == tag)
    }
}

/// The sub-document holding exactly the endpoints that carry `tag`, plus the
/// shared schemas they reach through references.
pub fn slice_by_tag(doc: &ApiDocument, tag: &str) -> Result<ApiDocument, OpenApiError> {
    if !list_tags(doc).iter().any(|t| t == tag) {
        return Err(OpenApiError::UnknownTag(tag.to_string()));
    }
    let endpoints: Vec<EndpointDef> = doc.endpoints.iter().filter(|e| carries_tag(e, tag)).cloned().collect();

    let mut pending = Vec::new();
    for e in &endpoints {
        e.collect_refs(&mut pending);
    }
    let mut reachable = HashSet::new();
    while let Some(name) = pending.pop() {
        if reachable.insert(name.clone()) {
            if let Some(schema) = doc.shared_schemas.get(&name) {
                schema.collect_refs(&mut pending);
            }
        }
    }
    let shared_schemas = doc
        .shared_schemas
        .iter()
        .filter(|(name, _)| reachable.contains(*name))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();

    Ok(ApiDocument { endpoints, shared_schemas, ..doc.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    const PING: &str = r#"
openapi: 3.0.3
info: {title: ping, version: "1"}
paths:
  /ping:
    get:
      responses:
        "200": {description: ok}
"#;

    fn two_tag_doc() -> &'static str {
        r##"{
  "openapi": "3.0.1",
  "info": {"title": "t", "version": "1"},
  "paths": {
    "/a": {"post": {"tags": ["A"], "requestBody": {"content": {"application/json": {"schema": {"$ref": "#/components/schemas/Outer"}}}},
                    "responses": {"201": {"description": "x"}}}},
    "/b": {"get": {"tags": ["B"], "responses": {"200": {"description": "x", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/OnlyB"}}}}}}}
  },
  "components": {"schemas": {
    "Outer": {"type": "object", "properties": {"inner": {"$ref": "#/components/schemas/Inner"}}},
    "Inner": {"type": "object", "properties": {"x": {"type": "integer"}}},
    "OnlyB": {"type": "object", "properties": {"y": {"type": "string"}}}
  }}
}"##
    }

    #[test]
    fn minimal_document() {
        let doc = parse_openapi(PING).unwrap();
        assert_eq!(doc.endpoints.len(), 1);
        let e = &doc.endpoints[0];
        assert_eq!((e.method, e.path.as_str()), (HttpMethod::Get, "/ping"));
        assert!(e.tags.is_empty());
        assert_eq!(e.responses.keys().copied().collect::<Vec<_>>(), vec![200]);
        assert_eq!(list_tags(&doc), vec![UNTAGGED.to_string()]);
    }

    #[test]
    fn dangling_ref_is_reported() {
        let text = r##"
openapi: 3.0.0
info: {title: x, version: "1"}
paths:
  /u:
    post:
      requestBody:
        content:
          application/json:
            schema: {$ref: "#/components/schemas/Missing"}
      responses: {"200": {description: ok}}
"##;
        assert_eq!(
            parse_openapi(text).unwrap_err(),
            OpenApiError::UnresolvableRef("#/components/schemas/Missing".into())
        );
    }

    #[test]
    fn swagger_two_is_rejected() {
        let err = parse_openapi("swagger: '2.0'\ninfo: {title: x}\npaths: {}\n").unwrap_err();
        assert!(matches!(err, OpenApiError::MalformedDocument(_)));
        let err = parse_openapi("openapi: [unclosed").unwrap_err();
        assert!(matches!(err, OpenApiError::MalformedDocument(_)));
    }

    #[test]
    fn duplicate_templates_collide() {
        let text = r#"
openapi: 3.1.0
info: {title: x, version: "1"}
paths:
  /users/{id}:
    get: {responses: {"200": {description: ok}}}
  /users/{userId}/:
    get: {responses: {"200": {description: ok}}}
"#;
        assert!(matches!(
            parse_openapi(text).unwrap_err(),
            OpenApiError::DuplicateEndpoint { method: HttpMethod::Get, .. }
        ));
    }

    #[test]
    fn undeclared_path_param_is_synthesized() {
        let text = r#"
openapi: 3.0.0
info: {title: x, version: "1"}
paths:
  /items/{itemId}:
    delete: {responses: {"204": {description: gone}}}
"#;
        let doc = parse_openapi(text).unwrap();
        let p = &doc.endpoints[0].parameters[0];
        assert_eq!((p.name.as_str(), p.location, p.required), ("itemId", ParamLocation::Path, true));
        assert_eq!(doc.warnings.len(), 1);
    }

    #[test]
    fn tags_dedupe_in_order() {
        let text = r#"
openapi: 3.0.0
info: {title: x, version: "1"}
paths:
  /a: {get: {tags: [Account], responses: {"200": {description: ok}}}}
  /b: {get: {tags: [Users], responses: {"200": {description: ok}}}}
  /c: {get: {tags: [Account], responses: {"200": {description: ok}}}}
"#;
        let doc = parse_openapi(text).unwrap();
        assert_eq!(list_tags(&doc), vec!["Account", "Users"]);
    }

    #[test]
    fn slice_keeps_only_reachable_schemas() {
        let doc = parse_openapi(two_tag_doc()).unwrap();
        let a = slice_by_tag(&doc, "A").unwrap();
        assert_eq!(a.endpoints.len(), 1);
        let names: Vec<_> = a.shared_schemas.keys().cloned().collect();
        assert_eq!(names, vec!["Outer", "Inner"]);
        let b = slice_by_tag(&doc, "B").unwrap();
        assert_eq!(b.shared_schemas.keys().collect::<Vec<_>>(), vec!["OnlyB"]);
        assert_eq!(slice_by_tag(&doc, "zzz").unwrap_err(), OpenApiError::UnknownTag("zzz".into()));
    }

    #[test]
    fn single_tag_slice_is_identity() {
        let text = r##"
openapi: 3.0.0
info: {title: x, version: "1"}
paths:
  /a: {post: {tags: [A], requestBody: {content: {application/json: {schema: {$ref: "#/components/schemas/S"}}}}, responses: {"201": {description: ok}}}}
  /b: {get: {tags: [A], responses: {"200": {description: ok}}}}
components:
  schemas:
    S: {type: object, properties: {n: {type: string}}}
"##;
        let doc = parse_openapi(text).unwrap();
        assert_eq!(slice_by_tag(&doc, "A").unwrap(), doc);
    }

    #[test]
    fn constraints_are_copied() {
        let c = extract_constraints(&json!({"type": "string", "minLength": 3, "maxLength": 10}));
        assert_eq!((c.min_length, c.max_length), (Some(3), Some(10)));
        let c = extract_constraints(&json!({"type": "object", "required": ["email", "password"]}));
        assert_eq!(c.required_fields.iter().collect::<Vec<_>>(), vec!["email", "password"]);
        let c = extract_constraints(&json!({"type": "integer", "minimum": 1}));
        assert_eq!((c.minimum, c.maximum), (Some(1.0), None));
        assert!(extract_constraints(&json!({"type": "boolean"})).is_empty());
    }

    #[test]
    fn inverted_bounds_are_malformed() {
        let text = r#"
openapi: 3.0.0
info: {title: x, version: "1"}
paths:
  /a:
    get:
      parameters: [{name: q, in: query, schema: {type: string, minLength: 9, maxLength: 2}}]
      responses: {"200": {description: ok}}
"#;
        assert!(matches!(parse_openapi(text).unwrap_err(), OpenApiError::MalformedDocument(_)));
    }

    #[test]
    fn all_of_merges_and_one_of_warns() {
        let text = r##"
openapi: 3.0.0
info: {title: x, version: "1"}
paths:
  /a:
    post:
      requestBody:
        content:
          application/json:
            schema:
              allOf:
                - $ref: "#/components/schemas/Base"
                - type: object
                  required: [extra]
                  properties: {extra: {type: integer, minimum: 0}}
      responses:
        "200":
          description: ok
          content:
            application/json:
              schema:
                oneOf: [{type: string}, {type: integer}]
components:
  schemas:
    Base: {type: object, required: [name], properties: {name: {type: string, maxLength: 5}}}
"##;
        let doc = parse_openapi(text).unwrap();
        let body = doc.endpoints[0].request_schema.as_ref().unwrap();
        assert_eq!(body.kind, SchemaKind::Object);
        assert_eq!(body.properties.keys().collect::<Vec<_>>(), vec!["name", "extra"]);
        assert_eq!(body.constraints.required_fields.iter().collect::<Vec<_>>(), vec!["name", "extra"]);
        let resp = doc.endpoints[0].responses[&200].as_ref().unwrap();
        assert_eq!(resp.kind, SchemaKind::String);
        assert!(doc.warnings.iter().any(|w| w.contains("oneOf")));
    }

    #[test]
    fn non_json_media_is_ignored() {
        let text = r#"
openapi: 3.0.0
info: {title: x, version: "1"}
paths:
  /f:
    post:
      requestBody: {content: {multipart/form-data: {schema: {type: object}}}}
      responses: {"200": {description: ok, content: {text/plain: {schema: {type: string}}}}}
"#;
        let doc = parse_openapi(text).unwrap();
        assert!(doc.endpoints[0].request_schema.is_none());
        assert_eq!(doc.endpoints[0].responses[&200], None);
    }

    #[test]
    fn security_falls_back_to_global() {
        let text = r#"
openapi: 3.0.0
info: {title: x, version: "1"}
security: [{bearer: []}]
paths:
  /a: {get: {responses: {"200": {description: ok}}}}
  /b: {get: {security: [], responses: {"200": {description: ok}}}}
components:
  securitySchemes:
    bearer: {type: http, scheme: Bearer}
"#;
        let doc = parse_openapi(text).unwrap();
        assert_eq!(doc.endpoints[0].security, vec!["bearer"]);
        assert!(doc.endpoints[1].security.is_empty());
        assert_eq!(doc.schemes["bearer"].scheme.as_deref(), Some("bearer"));
    }
}
