use std::path::Path;

use podnewton::export::ExportError;
use podnewton::SimulationError;
use podnewton_reservoir::ScenarioError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid benchmark spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl BenchError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.display().to_string(), source }
    }

    /// Stable identifier used in error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            BenchError::InvalidSpec(_) => "invalid_spec",
            BenchError::Scenario(_) => "scenario",
            BenchError::Simulation(SimulationError::InvalidInput(_)) => "invalid_input",
            BenchError::Simulation(SimulationError::StepFailed { .. }) => "step_failed",
            BenchError::Export(_) => "export",
            BenchError::Csv(_) => "csv",
            BenchError::Json(_) => "json",
            BenchError::Io { .. } => "io",
            BenchError::ThreadPool(_) => "thread_pool",
        }
    }
}
