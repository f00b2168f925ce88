//! Config-driven batch runner over `kaczmarz-core`.

pub mod config;
pub mod error;
pub mod runner;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{CliError, Result};
pub use runner::{run_config, Overrides, RunSummary};

/// One `name  description` line per experiment kind.
pub fn catalog_text() -> String {
    ExperimentKind::ALL
        .iter()
        .map(|k| format!("{:<22}{}\n", k.name(), k.description()))
        .collect()
}

pub fn catalog_json() -> serde_json::Value {
    serde_json::Value::Array(
        ExperimentKind::ALL
            .iter()
            .map(|k| serde_json::json!({ "kind": k.name(), "description": k.description() }))
            .collect(),
    )
}
