//! Inputs shared by the benchmarks.

use resttsl_core::metrics::ScoreRow;
use resttsl_core::openapi::HttpMethod;
use resttsl_core::tsl::{ExpectedResponse, MatcherTree, TslCase, TslDocument};
use rust_decimal::Decimal;
use serde_json::json;

pub const TODO_API: &str = include_str!("../../../fixtures/specs/todo-api.yaml");
pub const ACCOUNTS_API: &str = include_str!("../../../fixtures/specs/accounts-api.yaml");

/// `cases` cases spread round-robin over `groups` groups, each with a body
/// and a nested matcher.
pub fn synthetic_document(cases: usize, groups: usize) -> TslDocument {
    let groups = groups.max(1);
    TslDocument::new(
        (0..cases)
            .map(|i| TslCase {
                id: format!("TC{}", i + 1),
                group: format!("Group{}", i % groups),
                name: format!("Create Item {i} Returns 201"),
                endpoint: "/items/{id}".into(),
                method: HttpMethod::Post,
                preconditions: vec!["User is authenticated".into()],
                path_params: Some([("id".to_string(), json!(i))].into_iter().collect()),
                query_params: None,
                headers: Some([("Authorization".to_string(), json!("Bearer {{token}}"))].into_iter().collect()),
                request_body: Some(json!({"title": format!("item {i}"), "done": false, "tags": ["a", "b"]})),
                expected_response: ExpectedResponse {
                    status_code: 201,
                    body: Some(MatcherTree::Object(
                        [
                            ("id".to_string(), MatcherTree::TypeIs(resttsl_core::tsl::JsonKind::Integer)),
                            ("title".to_string(), MatcherTree::NonEmpty(resttsl_core::tsl::JsonKind::String)),
                        ]
                        .into_iter()
                        .collect(),
                    )),
                },
            })
            .collect(),
    )
}

/// `n` models with spread-out metrics.
pub fn synthetic_rows(n: usize) -> Vec<ScoreRow> {
    (0..n)
        .map(|i| {
            let f = i as f64;
            ScoreRow {
                model_id: format!("model-{i:03}"),
                s: 50.0 + (f * 7.3) % 40.0,
                sr: 90.0 + (f * 1.7) % 10.0,
                c: 40.0 + (f * 3.1) % 50.0,
                m: 20.0 + (f * 5.9) % 30.0,
                t: 200.0,
                tc: Decimal::new(i as i64, 2),
            }
        })
        .collect()
}
