//! Test Specification Language: a YAML list of declarative test cases.
//!
//! A case names an endpoint and method, optional preconditions and inputs,
//! and the expected status plus an optional body matcher. Body leaves are
//! either literals or matcher expressions such as `is string not empty`.

mod codec;
mod derive;
mod ids;
mod matcher;
mod model;
mod sample;
mod validate;
mod yaml;

pub use codec::{parse_tsl, serialize_tsl};
pub use derive::{derive_cases_cp, error_status};
pub use ids::{contains_id, id_positions};
pub use matcher::{json_equal, kind_matches, match_value, matcher_expr, parse_matcher_expr, MATCHER_PREFIX};
pub use model::*;
pub use sample::{sample_matching, sample_violating};
pub use validate::{has_errors, path_matches, validate_against_spec, IssueCode, Severity, ValidationIssue};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TslError {
    #[error("TSL syntax error: {0}")]
    TslSyntax(String),
    #[error("case {case}: missing field `{field}`")]
    MissingField { case: String, field: String },
    #[error("case {case}: invalid `{field}`: {reason}")]
    InvalidField { case: String, field: String, reason: String },
    #[error("case {case}: `{field}` holds an unknown matcher `{text}`")]
    MatcherSyntax { case: String, field: String, text: String },
    #[error("duplicate case id `{0}`")]
    DuplicateId(String),
}
