use std::fs;
use std::path::PathBuf;

use resttsl_core::openapi::{list_tags, parse_openapi, slice_by_tag, ApiDocument};
use resttsl_core::tsl::{derive_cases_cp, has_errors, parse_tsl, serialize_tsl, validate_against_spec};

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

fn spec(name: &str) -> ApiDocument {
    parse_openapi(&fs::read_to_string(fixture(&format!("specs/{name}"))).unwrap()).unwrap()
}

#[test]
fn every_fixture_spec_parses() {
    for entry in fs::read_dir(fixture("specs")).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        assert!(parse_openapi(&text).is_ok(), "{}", path.display());
    }
}

#[test]
fn todo_api_shape() {
    let api = spec("todo-api.yaml");
    assert_eq!(api.endpoints.len(), 7);
    assert_eq!(list_tags(&api), ["Users", "Todos"]);
    let users = slice_by_tag(&api, "Users").unwrap();
    assert_eq!(users.endpoints.len(), 2);
    assert!(users.shared_schemas.contains_key("Credentials"));
    assert!(!users.shared_schemas.contains_key("TodoInput"));
}

#[test]
fn accounts_api_has_three_tags() {
    let api = spec("accounts-api.yaml");
    assert_eq!(list_tags(&api), ["Account", "Users", "Transactions"]);
}

#[test]
fn derived_fixture_cases_validate_and_round_trip() {
    for name in ["todo-api.yaml", "accounts-api.yaml", "boundary-api.yaml"] {
        let api = spec(name);
        let doc = derive_cases_cp(&api);
        assert!(!doc.is_empty(), "{name}");
        let issues = validate_against_spec(&doc, &api);
        assert!(!has_errors(&issues), "{name}: {issues:?}");
        assert_eq!(parse_tsl(&serialize_tsl(&doc)).unwrap(), doc, "{name}");
    }
}

#[test]
fn canned_login_case_validates_against_accounts_api() {
    let doc = parse_tsl(&fs::read_to_string(fixture("completions/login.tsl.yaml")).unwrap()).unwrap();
    assert_eq!(validate_against_spec(&doc, &spec("accounts-api.yaml")), []);
}

#[test]
fn empty_paths_derive_nothing() {
    assert!(derive_cases_cp(&spec("empty-paths.yaml")).is_empty());
}
