//! Stage execution for (model, project) pairs.

use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use resttsl_core::codegen::{code_blocks, extract_test_code, merge_segments, scaffold_fallback_tests, TestSuite};
use resttsl_core::gateway::{
    thread_sleep, ChatProvider, ChatRequest, Completion, CostLedger, HttpTransport, MockProvider, OpenAiCompatible,
    ProviderConfig, RecordingProvider, ReplayProvider, ReqwestTransport, Sleeper,
};
use resttsl_core::metrics::{
    aggregate_projects, ingest_run_report, load_metrics_json, rank_models, render_rank_csv, render_rank_markdown,
    render_score_csv, render_score_markdown, Locale, MetricsFile, RankingTable, ScoreRow,
};
use resttsl_core::openapi::{parse_openapi, ApiDocument};
use resttsl_core::prompt::{plan_segments, Action, ChatMessage, ExamplePack, PromptStage, Prompter};
use resttsl_core::tsl::{
    derive_cases_cp, has_errors, parse_tsl, serialize_tsl, validate_against_spec, Severity, TslDocument,
    ValidationIssue,
};
use serde_json::json;

use crate::config::{Mode, PipelineConfig, Project};
use crate::error::CliError;
use crate::layout::{self, write_atomic, RunDir, REPORTS_DIR};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Options {
    /// Overrides the configured mode.
    pub mode: Option<Mode>,
    pub strict: bool,
    pub force: bool,
    pub parallel: usize,
    pub locale: Locale,
}

impl Default for Options {
    fn default() -> Self {
        Options { mode: None, strict: false, force: false, parallel: 1, locale: Locale::En }
    }
}

/// What one stage did for one pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageOutcome {
    pub label: String,
    pub skipped: bool,
    pub summary: String,
    pub warnings: Vec<String>,
}

impl StageOutcome {
    fn done(label: String, summary: String) -> Self {
        StageOutcome { label, skipped: false, summary, warnings: Vec::new() }
    }

    fn skipped(label: String, artifact: &Path) -> Self {
        StageOutcome {
            label,
            skipped: true,
            summary: format!("{} exists, skipped (use --force to rerun)", artifact.display()),
            warnings: Vec::new(),
        }
    }
}

pub struct Orchestrator {
    pub config: PipelineConfig,
    pub options: Options,
    transport: Option<Arc<dyn HttpTransport>>,
    sleeper: Sleeper,
    prompter: Prompter,
    pack: ExamplePack,
}

/// The TSL inside a completion: its first fenced block, or the whole text.
pub fn tsl_text(content: &str) -> String {
    code_blocks(content).into_iter().next().unwrap_or_else(|| content.to_string())
}

fn label(model: &ProviderConfig, project: &Project) -> String {
    format!("{}/{}", model.model_id, project.id)
}

fn count(issues: &[ValidationIssue], severity: Severity) -> usize {
    issues.iter().filter(|i| i.severity == severity).count()
}

impl Orchestrator {
    pub fn new(config: PipelineConfig, options: Options) -> Result<Orchestrator, CliError> {
        let prompter = config.prompter()?;
        let pack = config.example_pack()?;
        Ok(Orchestrator { config, options, transport: None, sleeper: thread_sleep(), prompter, pack })
    }

    /// Replaces the HTTP transport used in live and record modes.
    pub fn with_transport(mut self, transport: Arc<dyn HttpTransport>) -> Self {
        self.transport = Some(transport);
        self
    }

    pub fn with_sleeper(mut self, sleeper: Sleeper) -> Self {
        self.sleeper = sleeper;
        self
    }

    pub fn mode(&self) -> Mode {
        self.options.mode.unwrap_or(self.config.mode)
    }

    pub fn run_dir(&self, model: &ProviderConfig, project: &Project) -> RunDir {
        RunDir::for_model(&self.config.run_root(), &model.model_id, &project.id)
    }

    fn live(&self, model: &ProviderConfig) -> Result<OpenAiCompatible, CliError> {
        let transport = match &self.transport {
            Some(t) => Arc::clone(t),
            None => Arc::new(ReqwestTransport::new()?),
        };
        Ok(OpenAiCompatible::from_env(transport, model, Arc::clone(&self.sleeper)))
    }

    fn provider(&self, model: &ProviderConfig, run: &RunDir) -> Result<Box<dyn ChatProvider>, CliError> {
        Ok(match self.mode() {
            Mode::Mock => Box::new(MockProvider::new(self.config.mock_rules()?)),
            Mode::Replay => {
                let path = run.cassette();
                if !path.exists() {
                    return Err(CliError::Config(format!("replay mode needs a cassette at {}", path.display())));
                }
                Box::new(ReplayProvider::open(&path)?)
            }
            Mode::Live => Box::new(self.live(model)?),
            Mode::Record => Box::new(RecordingProvider::new(Box::new(self.live(model)?), run.cassette())),
        })
    }

    fn send(
        &self,
        provider: &dyn ChatProvider,
        model: &ProviderConfig,
        project: &Project,
        run: &RunDir,
        stage: PromptStage,
        messages: &[ChatMessage],
    ) -> Result<Completion, CliError> {
        let completion = provider.send(model, &ChatRequest { stage, messages })?;
        let entry = CostLedger::entry(model, &project.id, stage.as_str(), &completion);
        CostLedger::append(&run.ledger(), &entry)?;
        log::debug!(
            "{}: {} tokens in, {} out, {} ms",
            label(model, project),
            completion.input_tokens,
            completion.output_tokens,
            completion.latency_ms
        );
        Ok(completion)
    }

    pub fn load_spec(&self, project: &Project) -> Result<ApiDocument, CliError> {
        let path = self.config.resolve(&project.openapi);
        let text = layout::read(&path)?;
        parse_openapi(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    /// Spec to TSL through the model.
    pub fn gen_tsl(&self, model: &ProviderConfig, project: &Project) -> Result<StageOutcome, CliError> {
        let run = self.run_dir(model, project);
        if run.tsl().exists() && !self.options.force {
            return Ok(StageOutcome::skipped(label(model, project), &run.tsl()));
        }
        let api = self.load_spec(project)?;
        let script = self.prompter.assemble_conversation(&self.pack, Action::GenerateTsl(&api))?;
        write_atomic(&run.prompt("tsl"), &script.transcript())?;

        let provider = self.provider(model, &run)?;
        let messages = script.request(0).expect("one action message");
        let completion =
            self.send(provider.as_ref(), model, project, &run, PromptStage::ActionGenerateTsl, &messages)?;
        write_atomic(&run.response("tsl"), &completion.content)?;
        if completion.truncated {
            return Err(CliError::Provider(format!(
                "{}: the TSL completion was truncated; raise max_output_tokens",
                label(model, project)
            )));
        }

        let doc = parse_tsl(&tsl_text(&completion.content))
            .map_err(|e| CliError::Validation(format!("{}: {e}", label(model, project))))?;
        let issues = validate_against_spec(&doc, &api);
        write_atomic(&run.issues(), &layout::json(&issues))?;
        let provenance = json!({"source": "model", "model_id": model.model_id, "mode": self.mode().as_str()});
        write_atomic(&run.provenance(), &layout::json(&provenance))?;
        write_atomic(&run.tsl(), &serialize_tsl(&doc))?;

        let mut outcome = StageOutcome::done(
            label(model, project),
            format!(
                "{} cases, {} errors, {} warnings",
                doc.len(),
                count(&issues, Severity::Error),
                count(&issues, Severity::Warning)
            ),
        );
        outcome.warnings = issues.iter().map(ToString::to_string).collect();
        if self.options.strict && has_errors(&issues) {
            return Err(CliError::Validation(format!(
                "{}: TSL has validation errors (see {})",
                label(model, project),
                run.issues().display()
            )));
        }
        Ok(outcome)
    }

    fn load_tsl(&self, run: &RunDir, what: &str) -> Result<TslDocument, CliError> {
        let path = run.tsl();
        if !path.exists() {
            return Err(CliError::Validation(format!(
                "{what}: no TSL at {}; run gen-tsl or derive first",
                path.display()
            )));
        }
        let doc =
            parse_tsl(&layout::read(&path)?).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        if doc.is_empty() {
            return Err(CliError::Validation(format!("EmptyDocument: {} has no cases", path.display())));
        }
        Ok(doc)
    }

    /// TSL to test code, one request per segment. With `fallback` the suite
    /// is scaffolded from the TSL without a model.
    pub fn gen_tests(
        &self,
        model: &ProviderConfig,
        project: &Project,
        fallback: bool,
    ) -> Result<StageOutcome, CliError> {
        let run = self.run_dir(model, project);
        let what = label(model, project);
        if run.manifest().exists() && !self.options.force {
            return Ok(StageOutcome::skipped(what, &run.manifest()));
        }
        let doc = self.load_tsl(&run, &what)?;
        layout::remove_dir(&run.tests_dir())?;
        for stale in run.tests_responses() {
            std::fs::remove_file(&stale).map_err(|e| CliError::io(&stale, e))?;
        }

        let (suite, sends) = if fallback {
            (scaffold_fallback_tests(&doc, &self.config.framework)?, 0)
        } else {
            self.generate_suite(model, project, &run, &doc)?
        };
        for file in &suite.files {
            write_atomic(&run.tests_dir().join(&file.file_name), &file.content)?;
        }
        write_atomic(&run.manifest(), &suite.manifest_json())?;
        let source = if fallback { "scaffolded".to_string() } else { format!("{sends} requests") };
        Ok(StageOutcome::done(
            what,
            format!("{} tests in {} files ({source})", suite.manifest.len(), suite.files.len()),
        ))
    }

    fn generate_suite(
        &self,
        model: &ProviderConfig,
        project: &Project,
        run: &RunDir,
        doc: &TslDocument,
    ) -> Result<(TestSuite, usize), CliError> {
        let plan = plan_segments(doc, self.config.max_cases_per_segment)?;
        let script = self.prompter.assemble_conversation(&self.pack, Action::GenerateTests { doc, plan: &plan })?;
        write_atomic(&run.prompt("tests"), &script.transcript())?;
        let provider = self.provider(model, run)?;

        let mut per_segment = Vec::with_capacity(plan.len());
        let mut sends = 0;
        for (k, segment) in plan.segments.iter().enumerate() {
            let messages = script.request(k).expect("one action message per segment");
            let mut completion =
                self.send(provider.as_ref(), model, project, run, PromptStage::ActionGenerateTests, &messages)?;
            sends += 1;
            if completion.truncated {
                log::warn!("{}: segment {} was truncated, retrying once", label(model, project), k + 1);
                completion =
                    self.send(provider.as_ref(), model, project, run, PromptStage::ActionGenerateTests, &messages)?;
                sends += 1;
            }
            write_atomic(&run.tests_response(k), &completion.content)?;
            if completion.truncated {
                return Err(CliError::Provider(format!(
                    "{}: segment {} ({}) was truncated twice; lower max_cases_per_segment",
                    label(model, project),
                    k + 1,
                    segment.group
                )));
            }
            let (files, report) = extract_test_code(&completion, segment)
                .map_err(|e| CliError::Validation(format!("{}: segment {}: {e}", label(model, project), k + 1)))?;
            for reason in &report.discarded_reasons {
                log::info!("{}: segment {}: {reason}", label(model, project), k + 1);
            }
            per_segment.push(files);
        }
        Ok((merge_segments(per_segment, doc, &self.config.framework)?, sends))
    }

    /// Category-Partition baseline. Written into the model's run directory
    /// when one is given, otherwise under the shared derived directory.
    pub fn derive(&self, project: &Project, model: Option<&ProviderConfig>) -> Result<StageOutcome, CliError> {
        let run = match model {
            Some(m) => self.run_dir(m, project),
            None => RunDir::derived(&self.config.run_root(), &project.id),
        };
        let what = match model {
            Some(m) => label(m, project),
            None => format!("derived/{}", project.id),
        };
        if run.tsl().exists() && !self.options.force {
            return Ok(StageOutcome::skipped(what, &run.tsl()));
        }
        let api = self.load_spec(project)?;
        let doc = derive_cases_cp(&api);
        if doc.is_empty() {
            return Err(CliError::Validation(format!("EmptyDocument: {} declares no operations", project.id)));
        }
        let issues = validate_against_spec(&doc, &api);
        write_atomic(&run.issues(), &layout::json(&issues))?;
        write_atomic(&run.provenance(), &layout::json(&json!({"source": "category-partition"})))?;
        write_atomic(&run.tsl(), &serialize_tsl(&doc))?;
        Ok(StageOutcome::done(what, format!("{} cases derived", doc.len())))
    }

    /// Re-checks a stored TSL against its spec.
    pub fn validate(&self, project: &Project, model: Option<&ProviderConfig>) -> Result<StageOutcome, CliError> {
        let (run, what) = match model {
            Some(m) => (self.run_dir(m, project), label(m, project)),
            None => (RunDir::derived(&self.config.run_root(), &project.id), format!("derived/{}", project.id)),
        };
        let doc = self.load_tsl(&run, &what)?;
        let api = self.load_spec(project)?;
        let issues = validate_against_spec(&doc, &api);
        write_atomic(&run.issues(), &layout::json(&issues))?;
        let errors = count(&issues, Severity::Error);
        if errors > 0 {
            let detail: Vec<String> = issues.iter().map(ToString::to_string).collect();
            return Err(CliError::Validation(format!("{what}: {errors} errors\n{}", detail.join("\n"))));
        }
        let mut outcome = StageOutcome::done(
            what,
            format!("{} cases valid, {} warnings", doc.len(), count(&issues, Severity::Warning)),
        );
        outcome.warnings = issues.iter().map(ToString::to_string).collect();
        Ok(outcome)
    }

    /// Combines external test, coverage and mutation reports into the pair's
    /// metrics.json, costed from its ledger.
    pub fn ingest(
        &self,
        model: &ProviderConfig,
        project: &Project,
        test_report: &Path,
        coverage_report: &Path,
        mutation_report: &Path,
    ) -> Result<StageOutcome, CliError> {
        let run = self.run_dir(model, project);
        let (mut metrics, warnings) =
            ingest_run_report(&model.model_id, &project.id, test_report, coverage_report, mutation_report)?;
        if run.ledger().exists() {
            metrics.total_cost = CostLedger::load(&run.ledger())?.total_for(&model.model_id, &project.id);
        }
        write_atomic(&run.metrics(), &layout::json(&MetricsFile::from_run(&metrics)))?;
        let mut outcome = StageOutcome::done(
            label(model, project),
            format!(
                "SR {:.1}, C {:.1}, M {:.1}",
                metrics.success_rate, metrics.branch_coverage, metrics.mutation_score
            ),
        );
        outcome.warnings = warnings;
        Ok(outcome)
    }

    /// Per-model averages over every configured project.
    pub fn score_rows(&self) -> Result<Vec<ScoreRow>, CliError> {
        let weights = self.config.weights()?;
        let mut rows = Vec::with_capacity(self.config.models.len());
        for model in &self.config.models {
            let mut runs = Vec::with_capacity(self.config.projects.len());
            for project in &self.config.projects {
                let path = self.run_dir(model, project).metrics();
                runs.push(load_metrics_json(&path, &model.model_id, &project.id)?);
            }
            rows.push(aggregate_projects(&runs, &weights)?);
        }
        Ok(rows)
    }

    fn reports_dir(&self) -> std::path::PathBuf {
        self.config.run_root().join(REPORTS_DIR)
    }

    /// Writes reports/score.md and score.csv; returns the markdown.
    pub fn score(&self) -> Result<String, CliError> {
        let rows = self.score_rows()?;
        let locale = self.options.locale;
        let md = render_score_markdown(&rows, locale);
        write_atomic(&self.reports_dir().join("score.md"), &md)?;
        write_atomic(&self.reports_dir().join("score.csv"), &render_score_csv(&rows, locale))?;
        Ok(md)
    }

    /// Writes reports/rank.md and rank.csv; returns the table and markdown.
    pub fn rank(&self) -> Result<(RankingTable, String), CliError> {
        let table = rank_models(&self.score_rows()?);
        let locale = self.options.locale;
        let md = render_rank_markdown(&table, locale);
        write_atomic(&self.reports_dir().join("rank.md"), &md)?;
        write_atomic(&self.reports_dir().join("rank.csv"), &render_rank_csv(&table, locale))?;
        Ok((table, md))
    }

    pub fn select_models(&self, ids: &[String]) -> Result<Vec<&ProviderConfig>, CliError> {
        if ids.is_empty() {
            return Ok(self.config.models.iter().collect());
        }
        ids.iter()
            .map(|id| self.config.model(id).ok_or_else(|| CliError::Config(format!("unknown model `{id}`"))))
            .collect()
    }

    pub fn select_projects(&self, ids: &[String]) -> Result<Vec<&Project>, CliError> {
        if ids.is_empty() {
            return Ok(self.config.projects.iter().collect());
        }
        ids.iter()
            .map(|id| self.config.project(id).ok_or_else(|| CliError::Config(format!("unknown project `{id}`"))))
            .collect()
    }

    /// Runs `stage` for every (model, project) pair, up to `parallel` at a
    /// time. Results come back in model-major order.
    pub fn for_each_pair<F>(
        &self,
        models: &[&ProviderConfig],
        projects: &[&Project],
        stage: F,
    ) -> Vec<Result<StageOutcome, CliError>>
    where
        F: Fn(&ProviderConfig, &Project) -> Result<StageOutcome, CliError> + Sync,
    {
        let pairs: Vec<(&ProviderConfig, &Project)> =
            models.iter().flat_map(|m| projects.iter().map(move |p| (*m, *p))).collect();
        let threads = self.options.parallel.max(1);
        if threads == 1 {
            return pairs.into_iter().map(|(m, p)| stage(m, p)).collect();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(|| pairs.par_iter().map(|(m, p)| stage(m, p)).collect()),
            Err(e) => vec![Err(CliError::Config(format!("cannot start {threads} workers: {e}")))],
        }
    }
}
