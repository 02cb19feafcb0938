use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::openapi::HttpMethod;

/// JSON value kinds a matcher can test for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JsonKind {
    String,
    Number,
    Integer,
    Boolean,
    Array,
    Object,
}

impl JsonKind {
    pub const ALL: [JsonKind; 6] =
        [JsonKind::String, JsonKind::Number, JsonKind::Integer, JsonKind::Boolean, JsonKind::Array, JsonKind::Object];

    pub fn as_str(self) -> &'static str {
        match self {
            JsonKind::String => "string",
            JsonKind::Number => "number",
            JsonKind::Integer => "integer",
            JsonKind::Boolean => "boolean",
            JsonKind::Array => "array",
            JsonKind::Object => "object",
        }
    }

    pub fn parse(s: &str) -> Option<JsonKind> {
        JsonKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Kinds that `is <kind> not empty` may name.
    pub fn supports_non_empty(self) -> bool {
        matches!(self, JsonKind::String | JsonKind::Array)
    }
}

impl fmt::Display for JsonKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Expected-body assertion tree. Leaves are `Exact`, `TypeIs` or `NonEmpty`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MatcherTree {
    Exact(Value),
    TypeIs(JsonKind),
    NonEmpty(JsonKind),
    Object(IndexMap<String, MatcherTree>),
    Array(Vec<MatcherTree>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedResponse {
    pub status_code: u16,
    pub body: Option<MatcherTree>,
}

impl ExpectedResponse {
    pub fn status(status_code: u16) -> Self {
        ExpectedResponse { status_code, body: None }
    }
}

/// Scalar-valued parameter map (path, query or header parameters).
pub type ParamMap = IndexMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TslCase {
    pub id: String,
    pub group: String,
    pub name: String,
    pub endpoint: String,
    pub method: HttpMethod,
    pub preconditions: Vec<String>,
    pub path_params: Option<ParamMap>,
    pub query_params: Option<ParamMap>,
    pub headers: Option<ParamMap>,
    pub request_body: Option<Value>,
    pub expected_response: ExpectedResponse,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TslDocument {
    pub cases: Vec<TslCase>,
}

impl TslDocument {
    pub fn new(cases: Vec<TslCase>) -> Self {
        TslDocument { cases }
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.cases.iter().map(|c| c.id.as_str())
    }

    pub fn case(&self, id: &str) -> Option<&TslCase> {
        self.cases.iter().find(|c| c.id == id)
    }

    /// Sub-document with the given ids, in document order.
    pub fn subset<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> TslDocument {
        let wanted: std::collections::HashSet<&str> = ids.into_iter().collect();
        TslDocument { cases: self.cases.iter().filter(|c| wanted.contains(c.id.as_str())).cloned().collect() }
    }
}
