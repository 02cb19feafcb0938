use proptest::collection::vec;
use proptest::prelude::*;
use rust_decimal::Decimal;

use resttsl_core::codegen::{extract_test_code, merge_segments, scaffold_fallback_tests};
use resttsl_core::gateway::{estimate_cost, fingerprint, Completion, CostLedger, ProviderConfig};
use resttsl_core::metrics::{
    calculated_score, rank_models, tally_failures, FailureCategory, FailureRecord, Metric, ScoreRow, Weights,
};
use resttsl_core::openapi::HttpMethod;
use resttsl_core::prompt::{plan_segments, Action, ChatMessage, ExamplePack, PromptConfig, Prompter, Role};
use resttsl_core::tsl::{contains_id, ExpectedResponse, JsonKind, MatcherTree, TslCase, TslDocument};

fn doc_from_groups(groups: &[usize]) -> TslDocument {
    let cases = groups
        .iter()
        .enumerate()
        .map(|(i, g)| TslCase {
            id: format!("TC{}", i + 1),
            group: format!("G{g}"),
            name: format!("Case {} Returns 200", i + 1),
            endpoint: "/things".into(),
            method: HttpMethod::Post,
            preconditions: vec![],
            path_params: None,
            query_params: None,
            headers: None,
            request_body: Some(serde_json::json!({"email": "a@example.com", "n": i})),
            expected_response: ExpectedResponse {
                status_code: 200,
                body: Some(MatcherTree::Object(
                    [("id".to_string(), MatcherTree::NonEmpty(JsonKind::String))].into_iter().collect(),
                )),
            },
        })
        .collect();
    TslDocument::new(cases)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn segments_partition_the_document(groups in vec(0usize..4, 1..40), max in 1usize..12) {
        let doc = doc_from_groups(&groups);
        let plan = plan_segments(&doc, max).unwrap();
        let mut seen: Vec<&str> = plan.segments.iter().flat_map(|s| s.case_ids.iter().map(String::as_str)).collect();
        prop_assert_eq!(seen.len(), doc.len());
        // Document order within each group, groups in first-appearance order.
        let mut expected: Vec<&str> = Vec::new();
        let mut order: Vec<&str> = Vec::new();
        for c in &doc.cases {
            if !order.contains(&c.group.as_str()) {
                order.push(&c.group);
            }
        }
        for g in &order {
            expected.extend(doc.cases.iter().filter(|c| c.group == *g).map(|c| c.id.as_str()));
        }
        prop_assert_eq!(&seen, &expected);
        for s in &plan.segments {
            prop_assert!(!s.case_ids.is_empty() && s.case_ids.len() <= max);
            prop_assert!(s.case_ids.iter().all(|id| doc.case(id).unwrap().group == s.group));
        }
        seen.sort();
        seen.dedup();
        prop_assert_eq!(seen.len(), doc.len());
    }

    #[test]
    fn test_prompts_contain_exactly_their_segment(groups in vec(0usize..3, 1..25), max in 1usize..8, pt in any::<bool>()) {
        let doc = doc_from_groups(&groups);
        let plan = plan_segments(&doc, max).unwrap();
        let lang = if pt { "pt" } else { "en" };
        let prompter = Prompter::new(&PromptConfig::new(lang, "xunit-dotnet").unwrap()).unwrap();
        let pack = ExamplePack::builtin();
        let script = prompter.assemble_conversation(&pack, Action::GenerateTests { doc: &doc, plan: &plan }).unwrap();
        prop_assert_eq!(script.len(), 5 + plan.segments.len());
        prop_assert_eq!(script.messages.iter().filter(|m| m.role == Role::System).count(), 1);
        prop_assert_eq!(script.messages[0].role, Role::System);
        for (k, seg) in plan.segments.iter().enumerate() {
            let msg = &script.messages[5 + k].content;
            for id in doc.ids() {
                prop_assert_eq!(contains_id(msg, id), seg.case_ids.iter().any(|s| s == id), "{} in segment {}", id, k);
            }
        }
    }

    #[test]
    fn scaffolded_suites_are_complete_and_structured(groups in vec(0usize..3, 0..12), python in any::<bool>()) {
        let doc = doc_from_groups(&groups);
        let key = if python { "pytest-requests" } else { "xunit-dotnet" };
        let suite = scaffold_fallback_tests(&doc, key).unwrap();
        prop_assert_eq!(&suite, &scaffold_fallback_tests(&doc, key).unwrap());
        prop_assert_eq!(suite.manifest.len(), doc.len());
        let marker = if python { "#" } else { "//" };
        for (id, entry) in &suite.manifest {
            let prefix = format!("{id}_");
            prop_assert!(entry.test_name.starts_with(&prefix));
            let file = suite.files.iter().find(|f| f.file_name == entry.file_name).unwrap();
            let at = file.content.find(&entry.test_name).unwrap();
            let rest = &file.content[at..];
            let end = rest[1..].find(if python { "\ndef " } else { "[Fact]" }).map_or(rest.len(), |e| e + 1);
            let body = &rest[..end];
            let pos: Vec<usize> = ["Arrange", "Act", "Assert"]
                .iter()
                .map(|s| {
                    let m = format!("{marker} {s}\n");
                    assert_eq!(body.matches(&m).count(), 1, "{m} in {body}");
                    body.find(&m).unwrap()
                })
                .collect();
            prop_assert!(pos[0] < pos[1] && pos[1] < pos[2]);
            prop_assert!(!body.contains("a@example.com"));
        }
    }

    #[test]
    fn extraction_of_scaffolded_code_round_trips(groups in vec(0usize..3, 1..10)) {
        let doc = doc_from_groups(&groups);
        let plan = plan_segments(&doc, 4).unwrap();
        let suite = scaffold_fallback_tests(&doc, "xunit-dotnet").unwrap();
        let mut per_segment = Vec::new();
        for seg in &plan.segments {
            let sub = doc.subset(seg.case_ids.iter().map(String::as_str));
            let code = &scaffold_fallback_tests(&sub, "xunit-dotnet").unwrap().files[0].content;
            let completion = Completion { content: format!("```csharp\n{code}```\n"), input_tokens: 1, output_tokens: 1, latency_ms: 0, truncated: false };
            let first = extract_test_code(&completion, seg).unwrap();
            prop_assert_eq!(&first, &extract_test_code(&completion, seg).unwrap());
            per_segment.push(first.0);
        }
        let merged = merge_segments(per_segment, &doc, "xunit-dotnet").unwrap();
        prop_assert_eq!(merged.manifest.len(), doc.len());
        for (id, entry) in &merged.manifest {
            prop_assert_eq!(&entry.test_name, &suite.manifest[id].test_name);
        }
    }
}

fn pct() -> impl Strategy<Value = f64> {
    (0u32..=1000).prop_map(|n| n as f64 / 10.0)
}

fn weights() -> impl Strategy<Value = Weights> {
    (0.0f64..10.0, 0.0f64..10.0, 0.0f64..10.0)
        .prop_filter("positive total", |(a, b, c)| a + b + c > 1e-3)
        .prop_map(|(a, b, c)| Weights::normalized(a, b, c).unwrap())
}

fn rows() -> impl Strategy<Value = Vec<ScoreRow>> {
    vec((pct(), pct(), pct()), 1..9).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (sr, c, m))| ScoreRow {
                model_id: format!("model-{i}"),
                s: calculated_score(sr, c, m, &Weights::default()).unwrap(),
                sr,
                c,
                m,
                t: 0.0,
                tc: Decimal::ZERO,
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn score_is_monotone(w in weights(), sr in pct(), c in pct(), m in pct(), bump in pct()) {
        let base = calculated_score(sr, c, m, &w).unwrap();
        let up = |v: f64| (v + bump).min(100.0);
        prop_assert!(calculated_score(up(sr), c, m, &w).unwrap() >= base - 1e-12);
        prop_assert!(calculated_score(sr, up(c), m, &w).unwrap() >= base - 1e-12);
        prop_assert!(calculated_score(sr, c, up(m), &w).unwrap() >= base - 1e-12);
    }

    #[test]
    fn equal_weight_score_is_bounded(sr in pct(), c in pct(), m in pct()) {
        let s = calculated_score(sr, c, m, &Weights::default()).unwrap();
        prop_assert!(s >= sr.min(c).min(m) - 1e-9 && s <= sr.max(c).max(m) + 1e-9);
    }

    #[test]
    fn scaling_weights_changes_nothing(raw in (0.01f64..5.0, 0.01f64..5.0, 0.01f64..5.0), k in 0.1f64..100.0, rows in rows()) {
        let a = Weights::normalized(raw.0, raw.1, raw.2).unwrap();
        let b = Weights::normalized(raw.0 * k, raw.1 * k, raw.2 * k).unwrap();
        let rescore = |w: &Weights| {
            let rs: Vec<ScoreRow> = rows
                .iter()
                .map(|r| ScoreRow { s: calculated_score(r.sr, r.c, r.m, w).unwrap(), ..r.clone() })
                .collect();
            rank_models(&rs).column(Metric::S).iter().map(|e| e.model_id.clone()).collect::<Vec<_>>()
        };
        prop_assert_eq!(rescore(&a), rescore(&b));
    }

    #[test]
    fn deltas_are_consistent(rows in rows()) {
        let table = rank_models(&rows);
        for metric in Metric::ALL {
            let col = table.column(metric);
            prop_assert_eq!(col.len(), rows.len());
            prop_assert_eq!(col[0].delta, None);
            for e in &col[1..] {
                let d = e.delta.unwrap();
                prop_assert_eq!(col[0].value + d, e.value);
                prop_assert!(d <= Decimal::ZERO);
            }
        }
    }

    #[test]
    fn taxonomy_conserves_records(cats in vec(0usize..6, 0..60)) {
        let records: Vec<FailureRecord> = cats
            .iter()
            .map(|i| FailureRecord {
                model_id: "m".into(),
                project_id: "p".into(),
                case_id: "TC1".into(),
                category: FailureCategory::ALL[*i],
                note: String::new(),
            })
            .collect();
        let tax = tally_failures(&records);
        prop_assert_eq!(tax.total(), records.len() as u64);
        for (i, c) in FailureCategory::ALL.iter().enumerate() {
            prop_assert_eq!(tax.count(*c), cats.iter().filter(|x| **x == i).count() as u64);
        }
    }

    #[test]
    fn ledger_is_additive(calls in vec((0u64..2_000_000, 0u64..2_000_000), 0..20), pin in 0u32..5000, pout in 0u32..5000) {
        let mut config = ProviderConfig::new("p", "m");
        config.price_in_per_million = Decimal::new(pin.into(), 2);
        config.price_out_per_million = Decimal::new(pout.into(), 2);
        let mut ledger = CostLedger::default();
        let mut expected = Decimal::ZERO;
        for (i, o) in &calls {
            let c = Completion { content: String::new(), input_tokens: *i, output_tokens: *o, latency_ms: 0, truncated: false };
            ledger.push(CostLedger::entry(&config, "proj", "ActionGenerateTests", &c));
            expected += Decimal::from(*i) * config.price_in_per_million / Decimal::from(1_000_000)
                + Decimal::from(*o) * config.price_out_per_million / Decimal::from(1_000_000);
            prop_assert!(estimate_cost(*i, *o, &config) >= Decimal::ZERO);
        }
        prop_assert_eq!(ledger.total(), expected);
        prop_assert_eq!(ledger.total_for("m", "proj"), expected);
    }

    #[test]
    fn fingerprints_are_stable(model in "[a-z0-9-]{1,12}", contents in vec("[ -~]{1,30}", 1..5)) {
        let msgs: Vec<ChatMessage> = contents.iter().map(|c| ChatMessage::user(c.clone())).collect();
        let a = fingerprint(&model, &msgs);
        prop_assert_eq!(&a, &fingerprint(&model, &msgs.clone()));
        prop_assert_eq!(a.len(), 64);
        let mut other = msgs.clone();
        other[0] = ChatMessage::assistant(other[0].content.clone());
        prop_assert_ne!(a, fingerprint(&model, &other));
    }
}
