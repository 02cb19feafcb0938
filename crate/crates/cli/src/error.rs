use resttsl_core::codegen::CodegenError;
use resttsl_core::gateway::GatewayError;
use resttsl_core::metrics::MetricsError;
use resttsl_core::openapi::OpenApiError;
use resttsl_core::prompt::PromptError;
use resttsl_core::tsl::TslError;

/// Failures grouped by the exit code they map to.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("{0}")]
    Validation(String),
    #[error("provider: {0}")]
    Provider(String),
}

impl CliError {
    /// 1 for config and I/O problems, 2 for invalid documents or suites,
    /// 3 for provider failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Provider(_) => 3,
        }
    }

    pub(crate) fn io(path: &std::path::Path, e: impl std::fmt::Display) -> CliError {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl From<GatewayError> for CliError {
    fn from(e: GatewayError) -> Self {
        match e {
            GatewayError::IoError(m) => CliError::Io(m),
            GatewayError::InvalidConfig(m) => CliError::Config(m),
            other => {
                let debug = format!("{other:?}");
                let variant = debug.split(['(', ' ', '{']).next().unwrap_or_default().to_string();
                CliError::Provider(format!("{variant}: {other}"))
            }
        }
    }
}

impl From<PromptError> for CliError {
    fn from(e: PromptError) -> Self {
        match e {
            PromptError::EmptyDocument | PromptError::PlanMismatch(_) | PromptError::EmptySpecification => {
                CliError::Validation(format!("{e:?}: {e}"))
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<OpenApiError> for CliError {
    fn from(e: OpenApiError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<TslError> for CliError {
    fn from(e: TslError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<CodegenError> for CliError {
    fn from(e: CodegenError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Validation(e.to_string())
    }
}
