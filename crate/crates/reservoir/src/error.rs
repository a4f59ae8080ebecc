use std::path::Path;

use podnewton::EvalError;
use thiserror::Error;

/// A state outside the physical domain of the property models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThermoError {
    #[error("no oil moles in cell")]
    NoOil,
    #[error("non-positive oil volume {0:e} m3")]
    NonPositiveOilVolume(f64),
    #[error("molar volume {v:e} not above co-volume {b:e}")]
    BelowCovolume { v: f64, b: f64 },
    #[error("negative reduced density {0:e}")]
    NegativeReducedDensity(f64),
    #[error("no liquid root at p = {0:e} Pa")]
    NoLiquidRoot(f64),
}

impl From<ThermoError> for EvalError {
    fn from(e: ThermoError) -> Self {
        EvalError::Domain(e.to_string())
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
}

impl ScenarioError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.display().to_string(), source }
    }
}
