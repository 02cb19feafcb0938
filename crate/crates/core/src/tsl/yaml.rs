//! Minimal block-style YAML writer with a fixed layout (2-space indent,
//! sequences indented under their key).

use serde_json::Value;

pub(crate) enum Node {
    Scalar(String),
    Map(Vec<(String, Node)>),
    Seq(Vec<Node>),
}

impl Node {
    /// A JSON value; strings are always double-quoted.
    pub(crate) fn data(value: &Value) -> Node {
        match value {
            Value::Object(map) => Node::Map(map.iter().map(|(k, v)| (key(k), Node::data(v))).collect()),
            Value::Array(items) => Node::Seq(items.iter().map(Node::data).collect()),
            other => Node::Scalar(scalar(other)),
        }
    }

    /// A string written plain when that is unambiguous.
    pub(crate) fn text(s: &str) -> Node {
        Node::Scalar(key(s))
    }
}

pub(crate) fn render_document(items: Vec<Node>) -> String {
    if items.is_empty() {
        return "[]\n".to_string();
    }
    let mut out = String::new();
    seq(&mut out, String::new(), 0, &items);
    out
}

fn map(out: &mut String, first: String, indent: usize, entries: &[(String, Node)]) {
    for (i, (k, v)) in entries.iter().enumerate() {
        let lead = if i == 0 { first.clone() } else { " ".repeat(indent) };
        match v {
            Node::Scalar(s) => out.push_str(&format!("{lead}{k}: {s}\n")),
            Node::Map(es) if es.is_empty() => out.push_str(&format!("{lead}{k}: {{}}\n")),
            Node::Seq(xs) if xs.is_empty() => out.push_str(&format!("{lead}{k}: []\n")),
            Node::Map(es) => {
                out.push_str(&format!("{lead}{k}:\n"));
                map(out, " ".repeat(indent + 2), indent + 2, es);
            }
            Node::Seq(xs) => {
                out.push_str(&format!("{lead}{k}:\n"));
                seq(out, " ".repeat(indent + 2), indent + 2, xs);
            }
        }
    }
}

fn seq(out: &mut String, first: String, indent: usize, items: &[Node]) {
    for (i, item) in items.iter().enumerate() {
        let lead = if i == 0 { first.clone() } else { " ".repeat(indent) };
        let dash = format!("{lead}- ");
        match item {
            Node::Scalar(s) => out.push_str(&format!("{dash}{s}\n")),
            Node::Map(es) if es.is_empty() => out.push_str(&format!("{dash}{{}}\n")),
            Node::Seq(xs) if xs.is_empty() => out.push_str(&format!("{dash}[]\n")),
            Node::Map(es) => map(out, dash, indent + 2, es),
            Node::Seq(xs) => seq(out, dash, indent + 2, xs),
        }
    }
}

pub(crate) fn scalar(value: &Value) -> String {
    match value {
        Value::Null => "null".into(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => {
            let s = n.to_string();
            if n.is_f64() && !s.contains(['.', 'e', 'E']) {
                format!("{s}.0")
            } else {
                s
            }
        }
        Value::String(s) => quote(s),
        Value::Array(_) | Value::Object(_) => unreachable!("containers are not scalars"),
    }
}

/// Mapping key or structural text: plain when safe, quoted otherwise.
pub(crate) fn key(s: &str) -> String {
    if plain_safe(s) {
        s.to_string()
    } else {
        quote(s)
    }
}

pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if needs_escape(c) => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn needs_escape(c: char) -> bool {
    let u = c as u32;
    u < 0x20 || (0x7F..=0x9F).contains(&u) || matches!(u, 0x2028 | 0x2029 | 0xFEFF | 0xFFFE | 0xFFFF)
}

const RESERVED_WORDS: [&str; 10] = ["null", "~", "true", "false", "yes", "no", "on", "off", "y", "n"];

fn plain_safe(s: &str) -> bool {
    let Some(first) = s.chars().next() else {
        return false;
    };
    if first.is_whitespace()
        || s.ends_with(char::is_whitespace)
        || s.ends_with(':')
        || first.is_ascii_digit()
        || "-?:,[]{}#&*!|>'\"%@`.+<=".contains(first)
        || s.contains(": ")
        || s.contains(" #")
        || s.chars().any(|c| needs_escape(c) || c == '\t' || c == '\n' || c == '\r')
    {
        return false;
    }
    !RESERVED_WORDS.iter().any(|w| w.eq_ignore_ascii_case(s))
}
