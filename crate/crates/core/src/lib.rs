//! OpenAPI in, TSL test cases and integration-test suites out, plus the
//! scoring used to compare the models that generate them.

pub mod codegen;
pub mod gateway;
pub mod metrics;
pub mod openapi;
pub mod prompt;
pub mod template;
pub mod tsl;

pub use codegen::{TestFile, TestSuite};
pub use gateway::{ChatProvider, Completion, ProviderConfig};
pub use metrics::{RunMetrics, ScoreRow, Weights};
pub use openapi::{ApiDocument, EndpointDef, HttpMethod};
pub use prompt::{ChatMessage, ConversationScript, ExamplePack, PromptStage, SegmentPlan};
pub use tsl::{MatcherTree, TslCase, TslDocument};
