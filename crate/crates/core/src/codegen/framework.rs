use std::fmt;

use serde_json::Value;

use crate::tsl::JsonKind;

/// A target test framework: display name for prompts, the code fence tag
/// models use, and the scaffold templates.
pub struct Framework {
    pub key: &'static str,
    pub display_name: &'static str,
    pub fence: &'static str,
    pub file_template: &'static str,
    pub test_template: &'static str,
    pub(crate) dialect: &'static dyn Dialect,
}

impl fmt::Debug for Framework {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Framework").field("key", &self.key).finish()
    }
}

static FRAMEWORKS: [Framework; 2] = [
    Framework {
        key: "xunit-dotnet",
        display_name: "xUnit (.NET)",
        fence: "csharp",
        file_template: include_str!("../../templates/frameworks/xunit-dotnet/file.tmpl"),
        test_template: include_str!("../../templates/frameworks/xunit-dotnet/test.tmpl"),
        dialect: &CSharp,
    },
    Framework {
        key: "pytest-requests",
        display_name: "pytest with requests (Python)",
        fence: "python",
        file_template: include_str!("../../templates/frameworks/pytest-requests/file.tmpl"),
        test_template: include_str!("../../templates/frameworks/pytest-requests/test.tmpl"),
        dialect: &Python,
    },
];

pub fn framework(key: &str) -> Option<&'static Framework> {
    FRAMEWORKS.iter().find(|f| f.key == key)
}

pub fn framework_keys() -> impl Iterator<Item = &'static str> {
    FRAMEWORKS.iter().map(|f| f.key)
}

/// Language-specific snippets used by the scaffold generator.
pub(crate) trait Dialect: Sync {
    fn indent(&self) -> &'static str;
    fn comment(&self, text: &str) -> String;
    fn string(&self, s: &str) -> String {
        serde_json::to_string(s).expect("strings serialize")
    }
    /// An interpolated string where `{var}` parts refer to variables.
    fn interpolated(&self, parts: &[Part]) -> String;
    fn unique_email(&self) -> &'static str;
    fn declare(&self, name: &str, expr: &str) -> String;
    fn await_precondition(&self, text_expr: &str) -> String;
    fn value(&self, value: &Value, vars: &dyn Fn(&str) -> Option<String>) -> String;
    fn headers(&self, headers: &[(String, String)]) -> String;
    fn send(&self, method: &str, url: &str, payload: bool, headers: bool) -> String;
    fn assert_status(&self, status: u16) -> String;
    fn read_body(&self, root: RootShape) -> String;
    fn access(&self, base: &str, step: &Step) -> String;
    fn assert_kind(&self, target: &str, kind: JsonKind) -> String;
    fn assert_non_empty(&self, target: &str, kind: JsonKind) -> String;
    fn assert_exact(&self, target: &str, value: &Value) -> String;
    fn assert_len(&self, target: &str, len: usize) -> String;
    fn identifier(&self, s: &str) -> String;
}

pub(crate) enum Part<'a> {
    Text(&'a str),
    Var(&'a str),
}

pub(crate) enum Step {
    Field(String),
    Index(usize),
}

#[derive(Clone, Copy)]
pub(crate) enum RootShape {
    Object,
    Array,
    Other,
}

fn escape_braces(s: &str) -> String {
    s.replace('{', "{{").replace('}', "}}")
}

fn interpolate(prefix: &str, parts: &[Part]) -> String {
    let mut raw = String::new();
    for part in parts {
        match part {
            Part::Text(t) => raw.push_str(&escape_braces(t)),
            Part::Var(v) => raw.push_str(&format!("{{{v}}}")),
        }
    }
    format!("{prefix}{}", serde_json::to_string(&raw).expect("strings serialize"))
}

pub(crate) struct CSharp;

impl CSharp {
    fn status_name(status: u16) -> Option<&'static str> {
        Some(match status {
            200 => "OK",
            201 => "Created",
            202 => "Accepted",
            204 => "NoContent",
            400 => "BadRequest",
            401 => "Unauthorized",
            403 => "Forbidden",
            404 => "NotFound",
            405 => "MethodNotAllowed",
            409 => "Conflict",
            415 => "UnsupportedMediaType",
            422 => "UnprocessableEntity",
            429 => "TooManyRequests",
            500 => "InternalServerError",
            _ => return None,
        })
    }
}

impl Dialect for CSharp {
    fn indent(&self) -> &'static str {
        "        "
    }

    fn comment(&self, text: &str) -> String {
        format!("// {text}")
    }

    fn interpolated(&self, parts: &[Part]) -> String {
        interpolate("$", parts)
    }

    fn unique_email(&self) -> &'static str {
        "GenerateUniqueEmail()"
    }

    fn declare(&self, name: &str, expr: &str) -> String {
        format!("var {name} = {expr};")
    }

    fn await_precondition(&self, text_expr: &str) -> String {
        format!("await EnsurePreconditionAsync({text_expr});")
    }

    fn value(&self, value: &Value, vars: &dyn Fn(&str) -> Option<String>) -> String {
        match value {
            Value::Null => "null".into(),
            Value::Bool(b) => b.to_string(),
            Value::Number(n) => n.to_string(),
            Value::String(s) => vars(s).unwrap_or_else(|| self.string(s)),
            Value::Array(items) => {
                let inner: Vec<String> = items.iter().map(|v| self.value(v, vars)).collect();
                format!("new object?[] {{ {} }}", inner.join(", "))
            }
            Value::Object(map) => {
                let inner: Vec<String> =
                    map.iter().map(|(k, v)| format!("[{}] = {}", self.string(k), self.value(v, vars))).collect();
                if inner.is_empty() {
                    "new Dictionary<string, object?>()".into()
                } else {
                    format!("new Dictionary<string, object?> {{ {} }}", inner.join(", "))
                }
            }
        }
    }

    fn headers(&self, headers: &[(String, String)]) -> String {
        let inner: Vec<String> = headers.iter().map(|(k, v)| format!("[{}] = {}", self.string(k), v)).collect();
        format!("new Dictionary<string, string> {{ {} }}", inner.join(", "))
    }

    fn send(&self, method: &str, url: &str, payload: bool, headers: bool) -> String {
        format!(
            "var response = await SendAsync(new HttpMethod({}), {}, {}, {});",
            self.string(method),
            url,
            if payload { "payload" } else { "null" },
            if headers { "headers" } else { "null" }
        )
    }

    fn assert_status(&self, status: u16) -> String {
        match CSharp::status_name(status) {
            Some(name) => format!("Assert.Equal(HttpStatusCode.{name}, response.StatusCode);"),
            None => format!("Assert.Equal((HttpStatusCode){status}, response.StatusCode);"),
        }
    }

    fn read_body(&self, root: RootShape) -> String {
        let ty = match root {
            RootShape::Object => "JsonObject",
            RootShape::Array => "JsonArray",
            RootShape::Other => "JsonNode",
        };
        format!("var body = await response.Content.ReadFromJsonAsync<{ty}>();")
    }

    fn access(&self, base: &str, step: &Step) -> String {
        match step {
            Step::Field(name) => format!("{base}[{}]", self.string(name)),
            Step::Index(i) => format!("{base}[{i}]"),
        }
    }

    fn assert_kind(&self, target: &str, kind: JsonKind) -> String {
        match kind {
            JsonKind::Boolean => {
                format!("Assert.True({target}.GetValueKind() is JsonValueKind.True or JsonValueKind.False);")
            }
            JsonKind::Integer => format!("Assert.True({target}.AsValue().TryGetValue<long>(out _));"),
            JsonKind::String => format!("Assert.Equal(JsonValueKind.String, {target}.GetValueKind());"),
            JsonKind::Number => format!("Assert.Equal(JsonValueKind.Number, {target}.GetValueKind());"),
            JsonKind::Array => format!("Assert.Equal(JsonValueKind.Array, {target}.GetValueKind());"),
            JsonKind::Object => format!("Assert.Equal(JsonValueKind.Object, {target}.GetValueKind());"),
        }
    }

    fn assert_non_empty(&self, target: &str, kind: JsonKind) -> String {
        match kind {
            JsonKind::Array => format!("Assert.NotEmpty({target}.AsArray());"),
            _ => format!("Assert.False(string.IsNullOrEmpty({target}.ToString()));"),
        }
    }

    fn assert_exact(&self, target: &str, value: &Value) -> String {
        format!("Assert.True(JsonNode.DeepEquals(JsonNode.Parse({}), {target}));", self.string(&value.to_string()))
    }

    fn assert_len(&self, target: &str, len: usize) -> String {
        format!("Assert.Equal({len}, {target}.AsArray().Count);")
    }

    fn identifier(&self, s: &str) -> String {
        identifier(s)
    }
}

pub(crate) struct Python;

impl Dialect for Python {
    fn indent(&self) -> &'static str {
        "    "
    }

    fn comment(&self, text: &str) -> String {
        format!("# {text}")
    }

    fn interpolated(&self, parts: &[Part]) -> String {
        interpolate("f", parts)
    }

    fn unique_email(&self) -> &'static str {
        "generate_unique_email()"
    }

    fn declare(&self, name: &str, expr: &str) -> String {
        format!("{name} = {expr}")
    }

    fn await_precondition(&self, text_expr: &str) -> String {
        format!("ensure_precondition(api, {text_expr})")
    }

    fn value(&self, value: &Value, vars: &dyn Fn(&str) -> Option<String>) -> String {
        match value {
            Value::Null => "None".into(),
            Value::Bool(true) => "True".into(),
            Value::Bool(false) => "False".into(),
            Value::Number(n) => n.to_string(),
            Value::String(s) => vars(s).unwrap_or_else(|| self.string(s)),
            Value::Array(items) => {
                let inner: Vec<String> = items.iter().map(|v| self.value(v, vars)).collect();
                format!("[{}]", inner.join(", "))
            }
            Value::Object(map) => {
                let inner: Vec<String> =
                    map.iter().map(|(k, v)| format!("{}: {}", self.string(k), self.value(v, vars))).collect();
                format!("{{{}}}", inner.join(", "))
            }
        }
    }

    fn headers(&self, headers: &[(String, String)]) -> String {
        let inner: Vec<String> = headers.iter().map(|(k, v)| format!("{}: {}", self.string(k), v)).collect();
        format!("{{{}}}", inner.join(", "))
    }

    fn send(&self, method: &str, url: &str, payload: bool, headers: bool) -> String {
        let mut call = format!("response = send(api, {}, {}", self.string(method), url);
        if payload {
            call.push_str(", json=payload");
        }
        if headers {
            call.push_str(", headers=headers");
        }
        call.push(')');
        call
    }

    fn assert_status(&self, status: u16) -> String {
        format!("assert response.status_code == {status}")
    }

    fn read_body(&self, _root: RootShape) -> String {
        "body = response.json()".into()
    }

    fn access(&self, base: &str, step: &Step) -> String {
        match step {
            Step::Field(name) => format!("{base}[{}]", self.string(name)),
            Step::Index(i) => format!("{base}[{i}]"),
        }
    }

    fn assert_kind(&self, target: &str, kind: JsonKind) -> String {
        match kind {
            JsonKind::Boolean => format!("assert isinstance({target}, bool)"),
            JsonKind::Integer => {
                format!("assert isinstance({target}, int) and not isinstance({target}, bool)")
            }
            JsonKind::Number => format!("assert isinstance({target}, (int, float)) and not isinstance({target}, bool)"),
            JsonKind::String => format!("assert isinstance({target}, str)"),
            JsonKind::Array => format!("assert isinstance({target}, list)"),
            JsonKind::Object => format!("assert isinstance({target}, dict)"),
        }
    }

    fn assert_non_empty(&self, target: &str, kind: JsonKind) -> String {
        match kind {
            JsonKind::Array => format!("assert isinstance({target}, list) and len({target}) > 0"),
            _ => format!("assert isinstance({target}, str) and {target} != \"\""),
        }
    }

    fn assert_exact(&self, target: &str, value: &Value) -> String {
        format!("assert {target} == {}", self.value(value, &|_| None))
    }

    fn assert_len(&self, target: &str, len: usize) -> String {
        format!("assert len({target}) == {len}")
    }

    fn identifier(&self, s: &str) -> String {
        identifier(s)
    }
}

/// Letters, digits and underscores only; spaces become underscores.
pub(crate) fn identifier(s: &str) -> String {
    s.chars()
        .filter_map(|c| match c {
            ' ' | '-' => Some('_'),
            c if c.is_alphanumeric() || c == '_' => Some(c),
            _ => None,
        })
        .collect()
}
