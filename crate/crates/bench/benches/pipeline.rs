use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use resttsl_bench::{synthetic_document, synthetic_rows, ACCOUNTS_API, TODO_API};
use resttsl_core::codegen::scaffold_fallback_tests;
use resttsl_core::metrics::rank_models;
use resttsl_core::openapi::parse_openapi;
use resttsl_core::prompt::{plan_segments, Action, ExamplePack, PromptConfig, Prompter};
use resttsl_core::tsl::{derive_cases_cp, parse_tsl, serialize_tsl, validate_against_spec};

fn openapi(c: &mut Criterion) {
    c.bench_function("parse_openapi/todo", |b| b.iter(|| parse_openapi(black_box(TODO_API)).unwrap()));
    let api = parse_openapi(TODO_API).unwrap();
    c.bench_function("derive_cases_cp/todo", |b| b.iter(|| derive_cases_cp(black_box(&api))));
    let accounts = parse_openapi(ACCOUNTS_API).unwrap();
    let doc = derive_cases_cp(&accounts);
    c.bench_function("validate_against_spec/accounts", |b| {
        b.iter(|| validate_against_spec(black_box(&doc), &accounts))
    });
}

fn tsl(c: &mut Criterion) {
    let mut group = c.benchmark_group("tsl");
    for n in [10, 100, 1000] {
        let doc = synthetic_document(n, 5);
        let text = serialize_tsl(&doc);
        group.bench_with_input(BenchmarkId::new("serialize", n), &doc, |b, d| b.iter(|| serialize_tsl(d)));
        group.bench_with_input(BenchmarkId::new("parse", n), &text, |b, t| b.iter(|| parse_tsl(t).unwrap()));
    }
    group.finish();
}

fn prompts(c: &mut Criterion) {
    let prompter = Prompter::new(&PromptConfig::new("en", "xunit-dotnet").unwrap()).unwrap();
    let pack = ExamplePack::builtin();
    let doc = synthetic_document(200, 10);
    c.bench_function("plan_segments/200", |b| b.iter(|| plan_segments(black_box(&doc), 15).unwrap()));
    let plan = plan_segments(&doc, 15).unwrap();
    c.bench_function("assemble_tests_conversation/200", |b| {
        b.iter(|| prompter.assemble_conversation(&pack, Action::GenerateTests { doc: &doc, plan: &plan }).unwrap())
    });
    let api = parse_openapi(TODO_API).unwrap();
    c.bench_function("assemble_tsl_conversation/todo", |b| {
        b.iter(|| prompter.assemble_conversation(&pack, Action::GenerateTsl(&api)).unwrap())
    });
}

fn codegen(c: &mut Criterion) {
    let doc = synthetic_document(200, 10);
    c.bench_function("scaffold/200", |b| b.iter(|| scaffold_fallback_tests(black_box(&doc), "xunit-dotnet").unwrap()));
}

fn metrics(c: &mut Criterion) {
    let rows = synthetic_rows(100);
    c.bench_function("rank_models/100", |b| b.iter(|| rank_models(black_box(&rows))));
}

criterion_group!(benches, openapi, tsl, prompts, codegen, metrics);
criterion_main!(benches);
