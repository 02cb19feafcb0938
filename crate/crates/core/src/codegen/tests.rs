use super::*;
use crate::gateway::Completion;
use crate::prompt::Segment;
use crate::tsl::tests::LOGIN_CASE;
use crate::tsl::{parse_tsl, TslDocument};

const LOGIN_TEST: &str = r#"[Fact]
public async Task TC101_Login_Valid_Credentials_Returns_Token()
{
    // Arrange
    var email = GenerateUniqueEmail();
    var password = "Val1d!Pass";

    // Act
    var response = await LoginAsync(email, password);

    // Assert
    var body = await response.Content.ReadFromJsonAsync<JsonObject>();
    Assert.Equal(HttpStatusCode.OK, response.StatusCode);
    Assert.False(string.IsNullOrEmpty(body["userId"].ToString()));
}"#;

fn completion(content: &str) -> Completion {
    Completion { content: content.into(), input_tokens: 10, output_tokens: 10, latency_ms: 0, truncated: false }
}

fn segment(group: &str, ids: &[&str]) -> Segment {
    Segment { group: group.into(), case_ids: ids.iter().map(|s| s.to_string()).collect() }
}

fn two_case_doc() -> TslDocument {
    let mut doc = parse_tsl(LOGIN_CASE).unwrap();
    let mut second = doc.cases[0].clone();
    second.id = "TC102".into();
    second.name = "Login Wrong Password Returns 401".into();
    second.expected_response.status_code = 401;
    second.expected_response.body = None;
    doc.cases.push(second);
    doc
}

#[test]
fn single_fenced_block_claims_its_case() {
    let text = format!("Here you go:\n```csharp\n{LOGIN_TEST}\n```\nDone.");
    let (files, report) = extract_test_code(&completion(&text), &segment("Account", &["TC101"])).unwrap();
    assert_eq!(files.len(), 1);
    assert_eq!(files[0].case_ids, ["TC101"]);
    assert_eq!(files[0].file_name, "Account1.tests");
    assert_eq!(files[0].content, format!("{LOGIN_TEST}\n"));
    assert_eq!(report.blocks_used, 1);
    let again = extract_test_code(&completion(&text), &segment("Account", &["TC101"])).unwrap();
    assert_eq!(again.0, files);
}

#[test]
fn prose_only_completion_is_empty() {
    let err = extract_test_code(&completion("I would write a test for each case."), &segment("Account", &["TC101"]))
        .unwrap_err();
    assert!(matches!(err, CodegenError::ExtractionEmpty(_)));
}

#[test]
fn unfenced_pure_code_is_one_block() {
    let (files, _) = extract_test_code(&completion(LOGIN_TEST), &segment("Account", &["TC101"])).unwrap();
    assert_eq!(files[0].content.trim(), LOGIN_TEST);
}

#[test]
fn two_blocks_two_files() {
    let second = LOGIN_TEST.replace("TC101_Login_Valid_Credentials_Returns_Token", "TC102_Login_Wrong_Password");
    let text = format!("```csharp\n{LOGIN_TEST}\n```\n\n```csharp\n{second}\n```\n");
    let (files, report) = extract_test_code(&completion(&text), &segment("Account", &["TC101", "TC102"])).unwrap();
    assert_eq!(report.blocks_found, 2);
    assert_eq!(report.blocks_used, 2);
    assert_eq!(files[0].case_ids, ["TC101"]);
    assert_eq!(files[1].case_ids, ["TC102"]);
    assert_eq!(files[1].file_name, "Account2.tests");
}

#[test]
fn mention_does_not_claim_a_case() {
    let helper = "```csharp\n// helpers for TC101\nstatic string Token() => \"\";\n```";
    let text = format!("{helper}\n```csharp\n{LOGIN_TEST}\n```");
    let (files, report) = extract_test_code(&completion(&text), &segment("Account", &["TC101"])).unwrap();
    assert_eq!(files.len(), 1);
    assert!(files[0].content.contains("TC101_Login"));
    assert_eq!(report.discarded_reasons.len(), 1);
}

#[test]
fn tc10_is_not_found_inside_tc101() {
    let text = format!("```csharp\n{LOGIN_TEST}\n```");
    let err = extract_test_code(&completion(&text), &segment("Account", &["TC101", "TC10"])).unwrap_err();
    assert_eq!(err, CodegenError::MissingCases(vec!["TC10".into()]));
}

#[test]
fn truncated_completion_is_refused() {
    let mut c = completion(LOGIN_TEST);
    c.truncated = true;
    assert_eq!(extract_test_code(&c, &segment("A", &["TC101"])), Err(CodegenError::TruncatedCompletion));
}

fn file(group: &str, ids: &[&str], content: &str) -> TestFile {
    TestFile {
        file_name: String::new(),
        group: group.into(),
        content: content.into(),
        case_ids: ids.iter().map(|s| s.to_string()).collect(),
    }
}

#[test]
fn merge_builds_a_complete_manifest() {
    let doc = two_case_doc();
    let suite = merge_segments(
        vec![
            vec![file("Account", &["TC101"], LOGIN_TEST)],
            vec![file("Account", &["TC102"], "void TC102_Login_Wrong_Password() {}")],
        ],
        &doc,
        "xunit-dotnet",
    )
    .unwrap();
    assert_eq!(suite.manifest.len(), 2);
    assert_eq!(suite.manifest["TC101"].test_name, "TC101_Login_Valid_Credentials_Returns_Token");
    assert_eq!(suite.manifest["TC102"].file_name, "Account2.tests");
    let names: Vec<&str> = suite.files.iter().map(|f| f.file_name.as_str()).collect();
    assert_eq!(names, ["Account1.tests", "Account2.tests"]);
    assert!(suite.manifest_json().contains("\"file\": \"Account1.tests\""));
}

#[test]
fn merge_rejects_double_claims_and_gaps() {
    let doc = two_case_doc();
    let dup = merge_segments(
        vec![vec![file("Account", &["TC101"], LOGIN_TEST)], vec![file("Account", &["TC101", "TC102"], LOGIN_TEST)]],
        &doc,
        "xunit-dotnet",
    );
    assert!(matches!(dup, Err(CodegenError::DuplicateCaseId { id, .. }) if id == "TC101"));
    let gap = merge_segments(vec![vec![file("Account", &["TC101"], LOGIN_TEST)]], &doc, "xunit-dotnet");
    assert_eq!(gap.unwrap_err(), CodegenError::IncompleteSuite(vec!["TC102".into()]));
    let unknown = merge_segments(vec![vec![file("Account", &["TC7"], "")]], &doc, "xunit-dotnet");
    assert!(matches!(unknown, Err(CodegenError::UnknownCase { .. })));
    let empty = merge_segments(vec![], &TslDocument::default(), "xunit-dotnet").unwrap();
    assert!(empty.files.is_empty() && empty.manifest.is_empty());
}

#[test]
fn scaffolded_login_test_mirrors_the_handwritten_one() {
    let doc = parse_tsl(LOGIN_CASE).unwrap();
    let suite = scaffold_fallback_tests(&doc, "xunit-dotnet").unwrap();
    assert_eq!(suite.files.len(), 1);
    let code = &suite.files[0].content;
    assert!(code.contains("public async Task TC101_Login_Valid_Credentials_Returns_Token()"));
    assert!(code.contains("GenerateUniqueEmail()"));
    assert!(!code.contains("\"valid@test.com\""));
    assert!(code.contains("HttpStatusCode.OK"));
    for field in ["userId", "token", "refreshToken"] {
        assert!(
            code.contains(&format!("Assert.False(string.IsNullOrEmpty(body[\"{field}\"].ToString()));")),
            "{field}"
        );
    }
    let positions: Vec<usize> = ["// Arrange", "// Act", "// Assert"]
        .iter()
        .map(|m| {
            assert_eq!(code.matches(m).count(), 1, "{m}");
            code.find(m).unwrap()
        })
        .collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(suite.manifest["TC101"].test_name, "TC101_Login_Valid_Credentials_Returns_Token");
    assert_eq!(suite, scaffold_fallback_tests(&doc, "xunit-dotnet").unwrap());
}

#[test]
fn scaffold_for_python_and_edge_cases() {
    let doc = two_case_doc();
    let suite = scaffold_fallback_tests(&doc, "pytest-requests").unwrap();
    let code = &suite.files[0].content;
    assert!(code.contains("def test_TC101_Login_Valid_Credentials_Returns_Token(api):"));
    assert!(code.contains("generate_unique_email()"));
    assert_eq!(code.matches("# Arrange").count(), 2);
    assert_eq!(suite.manifest.len(), 2);

    assert!(scaffold_fallback_tests(&TslDocument::default(), "xunit-dotnet").unwrap().files.is_empty());
    assert_eq!(scaffold_fallback_tests(&doc, "junit").unwrap_err(), CodegenError::UnknownFramework("junit".into()));
}

#[test]
fn framework_registry() {
    assert_eq!(framework_keys().collect::<Vec<_>>(), ["xunit-dotnet", "pytest-requests"]);
    assert_eq!(framework("xunit-dotnet").unwrap().display_name, "xUnit (.NET)");
    assert!(framework("nope").is_none());
}
