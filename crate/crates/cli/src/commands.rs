//! Argument parsing and dispatch for the `resttsl` binary.

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use resttsl_core::gateway::HttpTransport;
use resttsl_core::metrics::Locale;

use crate::config::{Mode, PipelineConfig};
use crate::error::CliError;
use crate::pipeline::{Options, Orchestrator, StageOutcome};

#[derive(Debug, Parser)]
#[command(name = "resttsl", version, about = "OpenAPI to TSL to integration tests, with model scoring")]
pub struct Args {
    /// Pipeline configuration file.
    #[arg(long, global = true, default_value = "resttsl.yaml")]
    pub config: PathBuf,
    /// Overrides the configured provider mode: live, record, replay or mock.
    #[arg(long, global = true)]
    pub mode: Option<Mode>,
    /// Treat TSL validation errors as failures.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Rerun stages whose artifacts already exist.
    #[arg(long, global = true)]
    pub force: bool,
    /// Number of (model, project) pipelines to run at once.
    #[arg(long, global = true, default_value_t = 1)]
    pub parallel: usize,
    /// Number format of reports: en or pt.
    #[arg(long, global = true, default_value = "en")]
    pub locale: Locale,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct Pairs {
    /// Restrict to these model ids (repeatable).
    #[arg(long)]
    pub model: Vec<String>,
    /// Restrict to these project ids (repeatable).
    #[arg(long)]
    pub project: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate TSL from each project's OpenAPI document.
    GenTsl(Pairs),
    /// Generate test code from each stored TSL.
    GenTests {
        #[command(flatten)]
        pairs: Pairs,
        /// Scaffold tests from the TSL instead of asking the model.
        #[arg(long)]
        fallback: bool,
    },
    /// Derive baseline TSL with the Category-Partition method.
    Derive {
        #[arg(long)]
        project: Vec<String>,
        /// Write into this model's run directory instead of the shared one.
        #[arg(long)]
        model: Option<String>,
    },
    /// Re-check stored TSL against the OpenAPI document.
    Validate {
        #[command(flatten)]
        pairs: Pairs,
        /// Check the shared derived TSL instead of model runs.
        #[arg(long)]
        derived: bool,
    },
    /// Per-model averages over all projects.
    Score,
    /// Per-metric rankings with deltas from the leader.
    Rank,
    /// Rerun gen-tsl and gen-tests from recorded cassettes.
    Replay(Pairs),
    /// Turn external test, coverage and mutation reports into metrics.json.
    Ingest {
        #[arg(long)]
        model: String,
        #[arg(long)]
        project: String,
        #[arg(long)]
        tests: PathBuf,
        #[arg(long)]
        coverage: PathBuf,
        #[arg(long)]
        mutation: PathBuf,
    },
}

fn report(results: Vec<Result<StageOutcome, CliError>>) -> i32 {
    let mut code = 0;
    for result in results {
        match result {
            Ok(outcome) => {
                println!("{}: {}", outcome.label, outcome.summary);
                for w in &outcome.warnings {
                    eprintln!("  {w}");
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                code = code.max(e.exit_code());
            }
        }
    }
    code
}

fn fail(e: CliError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}

/// Runs one command and returns the process exit code. `transport`
/// replaces the HTTP client used by live and record modes.
pub fn execute(args: Args, transport: Option<Arc<dyn HttpTransport>>) -> i32 {
    let config = match PipelineConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let mode = match args.command {
        Command::Replay(_) => Some(Mode::Replay),
        _ => args.mode,
    };
    let options =
        Options { mode, strict: args.strict, force: args.force, parallel: args.parallel, locale: args.locale };
    let mut orchestrator = match Orchestrator::new(config, options) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    if let Some(t) = transport {
        orchestrator = orchestrator.with_transport(t);
    }
    match run(&orchestrator, &args.command) {
        Ok(code) => code,
        Err(e) => fail(e),
    }
}

fn run(o: &Orchestrator, command: &Command) -> Result<i32, CliError> {
    let code = match command {
        Command::GenTsl(pairs) => {
            let (models, projects) = (o.select_models(&pairs.model)?, o.select_projects(&pairs.project)?);
            report(o.for_each_pair(&models, &projects, |m, p| o.gen_tsl(m, p)))
        }
        Command::GenTests { pairs, fallback } => {
            let (models, projects) = (o.select_models(&pairs.model)?, o.select_projects(&pairs.project)?);
            report(o.for_each_pair(&models, &projects, |m, p| o.gen_tests(m, p, *fallback)))
        }
        Command::Replay(pairs) => {
            let (models, projects) = (o.select_models(&pairs.model)?, o.select_projects(&pairs.project)?);
            report(o.for_each_pair(&models, &projects, |m, p| {
                let tsl = o.gen_tsl(m, p)?;
                let tests = o.gen_tests(m, p, false)?;
                Ok(StageOutcome {
                    summary: format!("{}; {}", tsl.summary, tests.summary),
                    warnings: tsl.warnings,
                    ..tests
                })
            }))
        }
        Command::Derive { project, model } => {
            let model = match model {
                Some(id) => Some(o.select_models(std::slice::from_ref(id))?[0]),
                None => None,
            };
            let projects = o.select_projects(project)?;
            report(projects.iter().map(|p| o.derive(p, model)).collect())
        }
        Command::Validate { pairs, derived } => {
            let projects = o.select_projects(&pairs.project)?;
            if *derived {
                report(projects.iter().map(|p| o.validate(p, None)).collect())
            } else {
                let models = o.select_models(&pairs.model)?;
                report(o.for_each_pair(&models, &projects, |m, p| o.validate(p, Some(m))))
            }
        }
        Command::Score => {
            print!("{}", o.score()?);
            0
        }
        Command::Rank => {
            print!("{}", o.rank()?.1);
            0
        }
        Command::Ingest { model, project, tests, coverage, mutation } => {
            let m = o.select_models(std::slice::from_ref(model))?[0];
            let p = o.select_projects(std::slice::from_ref(project))?[0];
            report(vec![o.ingest(m, p, tests, coverage, mutation)])
        }
    };
    Ok(code)
}
