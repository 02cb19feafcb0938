use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use indexmap::{IndexMap, IndexSet};
use serde::{Deserialize, Serialize};

use super::OpenApiError;

/// HTTP verbs an endpoint can be declared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum HttpMethod {
    Get,
    Put,
    Post,
    Delete,
    Options,
    Head,
    Patch,
    Trace,
}

impl HttpMethod {
    pub const ALL: [HttpMethod; 8] = [
        HttpMethod::Get,
        HttpMethod::Put,
        HttpMethod::Post,
        HttpMethod::Delete,
        HttpMethod::Options,
        HttpMethod::Head,
        HttpMethod::Patch,
        HttpMethod::Trace,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            HttpMethod::Get => "GET",
            HttpMethod::Put => "PUT",
            HttpMethod::Post => "POST",
            HttpMethod::Delete => "DELETE",
            HttpMethod::Options => "OPTIONS",
            HttpMethod::Head => "HEAD",
            HttpMethod::Patch => "PATCH",
            HttpMethod::Trace => "TRACE",
        }
    }

    /// Lowercase key used under an OpenAPI path item.
    pub fn openapi_key(self) -> &'static str {
        match self {
            HttpMethod::Get => "get",
            HttpMethod::Put => "put",
            HttpMethod::Post => "post",
            HttpMethod::Delete => "delete",
            HttpMethod::Options => "options",
            HttpMethod::Head => "head",
            HttpMethod::Patch => "patch",
            HttpMethod::Trace => "trace",
        }
    }
}

impl fmt::Display for HttpMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown HTTP method `{0}`")]
pub struct UnknownMethod(pub String);

impl FromStr for HttpMethod {
    type Err = UnknownMethod;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        HttpMethod::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamLocation {
    Path,
    Query,
    Header,
}

impl ParamLocation {
    pub fn as_str(self) -> &'static str {
        match self {
            ParamLocation::Path => "path",
            ParamLocation::Query => "query",
            ParamLocation::Header => "header",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDef {
    pub name: String,
    pub location: ParamLocation,
    pub required: bool,
    pub schema: SchemaNode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemaKind {
    String,
    Number,
    Integer,
    Boolean,
    Array,
    Object,
    Ref,
}

impl SchemaKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemaKind::String => "string",
            SchemaKind::Number => "number",
            SchemaKind::Integer => "integer",
            SchemaKind::Boolean => "boolean",
            SchemaKind::Array => "array",
            SchemaKind::Object => "object",
            SchemaKind::Ref => "ref",
        }
    }
}

/// Validation keywords carried by a schema node.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub required_fields: IndexSet<String>,
    pub min_length: Option<u64>,
    pub max_length: Option<u64>,
    pub pattern: Option<String>,
    pub minimum: Option<f64>,
    pub maximum: Option<f64>,
    pub enum_values: Option<Vec<serde_json::Value>>,
    pub format: Option<String>,
}

impl ConstraintSet {
    pub fn is_empty(&self) -> bool {
        *self == ConstraintSet::default()
    }

    pub(crate) fn check(&self) -> Result<(), String> {
        if let (Some(lo), Some(hi)) = (self.min_length, self.max_length) {
            if lo > hi {
                return Err(format!("minLength {lo} exceeds maxLength {hi}"));
            }
        }
        if let (Some(lo), Some(hi)) = (self.minimum, self.maximum) {
            if lo > hi {
                return Err(format!("minimum {lo} exceeds maximum {hi}"));
            }
        }
        Ok(())
    }
}

/// A normalized JSON-schema node.
///
/// `properties` is only populated for objects, `items` only for arrays and
/// `ref_name` only for references into the shared schema table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaNode {
    pub kind: SchemaKind,
    pub constraints: ConstraintSet,
    pub properties: IndexMap<String, SchemaNode>,
    pub items: Option<Box<SchemaNode>>,
    pub ref_name: Option<String>,
}

impl SchemaNode {
    pub fn of_kind(kind: SchemaKind) -> Self {
        SchemaNode {
            kind,
            constraints: ConstraintSet::default(),
            properties: IndexMap::new(),
            items: None,
            ref_name: None,
        }
    }

    pub fn reference(name: impl Into<String>) -> Self {
        SchemaNode { ref_name: Some(name.into()), ..SchemaNode::of_kind(SchemaKind::Ref) }
    }

    pub fn array_of(items: SchemaNode) -> Self {
        SchemaNode { items: Some(Box::new(items)), ..SchemaNode::of_kind(SchemaKind::Array) }
    }

    /// Names of every shared schema referenced directly by this node or its children.
    pub fn collect_refs(&self, out: &mut Vec<String>) {
        if let Some(name) = &self.ref_name {
            out.push(name.clone());
        }
        for child in self.properties.values() {
            child.collect_refs(out);
        }
        if let Some(items) = &self.items {
            items.collect_refs(out);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecurityScheme {
    /// OpenAPI scheme type: http, apiKey, oauth2 or openIdConnect.
    pub kind: String,
    /// HTTP auth scheme (bearer, basic) for `http` schemes.
    pub scheme: Option<String>,
    /// Header/query name for `apiKey` schemes.
    pub param_name: Option<String>,
    pub location: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointDef {
    pub path: String,
    pub method: HttpMethod,
    pub operation_id: Option<String>,
    pub tags: Vec<String>,
    pub parameters: Vec<ParamDef>,
    pub request_schema: Option<SchemaNode>,
    pub responses: BTreeMap<u16, Option<SchemaNode>>,
    pub security: Vec<String>,
}

impl EndpointDef {
    pub fn primary_tag(&self) -> &str {
        self.tags.first().map(String::as_str).unwrap_or(UNTAGGED)
    }

    pub fn success_status(&self) -> Option<u16> {
        self.responses.keys().copied().find(|s| (200..300).contains(s))
    }

    pub fn params_in(&self, location: ParamLocation) -> impl Iterator<Item = &ParamDef> {
        self.parameters.iter().filter(move |p| p.location == location)
    }

    pub fn collect_refs(&self, out: &mut Vec<String>) {
        for p in &self.parameters {
            p.schema.collect_refs(out);
        }
        if let Some(s) = &self.request_schema {
            s.collect_refs(out);
        }
        for s in self.responses.values().flatten() {
            s.collect_refs(out);
        }
    }
}

/// Synthetic tag for endpoints that declare none.
pub const UNTAGGED: &str = "untagged";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiDocument {
    pub title: String,
    pub version: String,
    pub servers: Vec<String>,
    pub endpoints: Vec<EndpointDef>,
    pub schemes: IndexMap<String, SecurityScheme>,
    pub shared_schemas: IndexMap<String, SchemaNode>,
    /// Non-fatal notes collected while normalizing (e.g. `oneOf` collapsed to its first variant).
    pub warnings: Vec<String>,
}

impl ApiDocument {
    pub fn endpoint(&self, path: &str, method: HttpMethod) -> Option<&EndpointDef> {
        self.endpoints.iter().find(|e| e.path == path && e.method == method)
    }

    /// Follows `ref` nodes until a concrete schema is reached.
    pub fn resolve<'a>(&'a self, mut node: &'a SchemaNode) -> Option<&'a SchemaNode> {
        let mut hops = 0;
        while node.kind == SchemaKind::Ref {
            node = self.shared_schemas.get(node.ref_name.as_deref()?)?;
            hops += 1;
            if hops > self.shared_schemas.len() {
                return None;
            }
        }
        Some(node)
    }

    pub(crate) fn check_invariants(&self) -> Result<(), OpenApiError> {
        let mut seen = std::collections::HashSet::new();
        for e in &self.endpoints {
            if !seen.insert((normalize_template(&e.path), e.method)) {
                return Err(OpenApiError::DuplicateEndpoint { method: e.method, path: e.path.clone() });
            }
        }
        let mut refs = Vec::new();
        for e in &self.endpoints {
            e.collect_refs(&mut refs);
        }
        for s in self.shared_schemas.values() {
            s.collect_refs(&mut refs);
        }
        for r in refs {
            if !self.shared_schemas.contains_key(&r) {
                return Err(OpenApiError::UnresolvableRef(format!("#/components/schemas/{r}")));
            }
        }
        Ok(())
    }
}

/// Placeholder names of a URL template, in order.
pub fn template_params(path: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = path;
    while let Some(start) = rest.find('{') {
        let Some(len) = rest[start..].find('}') else {
            break;
        };
        out.push(&rest[start + 1..start + len]);
        rest = &rest[start + len + 1..];
    }
    out
}

/// `/users/{id}/` and `/users/{userId}` normalize to the same key.
pub(crate) fn normalize_template(path: &str) -> String {
    let trimmed = path.trim_end_matches('/');
    trimmed
        .split('/')
        .map(|seg| if seg.starts_with('{') && seg.ends_with('}') { "{}" } else { seg })
        .collect::<Vec<_>>()
        .join("/")
}
