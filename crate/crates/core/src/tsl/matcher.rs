use serde_json::Value;

use super::model::{JsonKind, MatcherTree};

/// Strings with this prefix in an expected body are matcher expressions.
pub const MATCHER_PREFIX: &str = "is ";

/// Parses `is <kind>` or `is <kind> not empty`.
///
/// Returns `None` for text outside that grammar.
pub fn parse_matcher_expr(text: &str) -> Option<MatcherTree> {
    let words: Vec<&str> = text.split_whitespace().collect();
    match words.as_slice() {
        ["is", kind] => JsonKind::parse(kind).map(MatcherTree::TypeIs),
        ["is", kind, "not", "empty"] => {
            JsonKind::parse(kind).filter(|k| k.supports_non_empty()).map(MatcherTree::NonEmpty)
        }
        _ => None,
    }
}

/// Text form of a leaf matcher; `None` for `Exact` and composite nodes.
pub fn matcher_expr(matcher: &MatcherTree) -> Option<String> {
    match matcher {
        MatcherTree::TypeIs(kind) => Some(format!("is {kind}")),
        MatcherTree::NonEmpty(kind) => Some(format!("is {kind} not empty")),
        _ => None,
    }
}

pub fn kind_matches(kind: JsonKind, value: &Value) -> bool {
    match (kind, value) {
        (JsonKind::String, Value::String(_)) => true,
        (JsonKind::Number, Value::Number(_)) => true,
        (JsonKind::Integer, Value::Number(n)) => {
            n.is_i64() || n.is_u64() || n.as_f64().is_some_and(|f| f.fract() == 0.0)
        }
        (JsonKind::Boolean, Value::Bool(_)) => true,
        (JsonKind::Array, Value::Array(_)) => true,
        (JsonKind::Object, Value::Object(_)) => true,
        _ => false,
    }
}

/// Structural equality where numbers compare by value (`200 == 200.0`).
pub fn json_equal(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => match (x.as_i64(), y.as_i64()) {
            (Some(i), Some(j)) => i == j,
            _ => match (x.as_u64(), y.as_u64()) {
                (Some(i), Some(j)) => i == j,
                _ => x.as_f64() == y.as_f64(),
            },
        },
        (Value::Array(xs), Value::Array(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| json_equal(x, y))
        }
        (Value::Object(xs), Value::Object(ys)) => {
            xs.len() == ys.len() && xs.iter().all(|(k, x)| ys.get(k).is_some_and(|y| json_equal(x, y)))
        }
        _ => a == b,
    }
}

/// Checks an actual response value against an expected-body matcher.
///
/// Object matchers ignore fields they do not name; array matchers require
/// equal length and match element-wise.
pub fn match_value(matcher: &MatcherTree, value: &Value) -> bool {
    match matcher {
        MatcherTree::Exact(expected) => json_equal(expected, value),
        MatcherTree::TypeIs(kind) => kind_matches(*kind, value),
        MatcherTree::NonEmpty(kind) => {
            kind_matches(*kind, value)
                && match value {
                    Value::String(s) => !s.is_empty(),
                    Value::Array(a) => !a.is_empty(),
                    _ => false,
                }
        }
        MatcherTree::Object(fields) => match value {
            Value::Object(actual) => fields.iter().all(|(k, m)| actual.get(k).is_some_and(|v| match_value(m, v))),
            _ => false,
        },
        MatcherTree::Array(items) => match value {
            Value::Array(actual) => {
                items.len() == actual.len() && items.iter().zip(actual).all(|(m, v)| match_value(m, v))
            }
            _ => false,
        },
    }
}
