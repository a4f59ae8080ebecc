//! Pure-component constants for the three oil components.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;

/// Number of hydrocarbon components.
pub const NC: usize = 3;

/// Component order used for every composition vector.
pub const COMPONENT_NAMES: [&str; NC] = ["CH4", "nC10", "CO2"];

const DEFAULT_TABLE: &str = include_str!("../data/components.json");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentProperties {
    #[serde(rename = "Tc_K")]
    pub critical_temperature: f64,
    #[serde(rename = "Pc_Pa")]
    pub critical_pressure: f64,
    #[serde(rename = "omega")]
    pub acentric_factor: f64,
    #[serde(rename = "M_kg_per_mol")]
    pub molar_mass: f64,
    /// Critical molar volume, needed by the LBC viscosity correlation.
    #[serde(rename = "Vc_m3_per_mol")]
    pub critical_volume: f64,
}

impl ComponentProperties {
    fn validate(&self, name: &str) -> Result<(), ScenarioError> {
        let positive = [self.critical_temperature, self.critical_pressure, self.molar_mass, self.critical_volume];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) || !(self.acentric_factor >= 0.0) {
            return Err(ScenarioError::Invalid(format!("component {name}: constants must be positive")));
        }
        Ok(())
    }
}

/// Properties of CH4, nC10 and CO2, in that order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentTable(pub [ComponentProperties; NC]);

impl ComponentTable {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let mut map: BTreeMap<String, ComponentProperties> = serde_json::from_str(text)?;
        let mut out = Vec::with_capacity(NC);
        for name in COMPONENT_NAMES {
            let c = map
                .remove(name)
                .ok_or_else(|| ScenarioError::Invalid(format!("component table lacks {name}")))?;
            c.validate(name)?;
            out.push(c);
        }
        if let Some(extra) = map.keys().next() {
            return Err(ScenarioError::Invalid(format!("unknown component {extra}")));
        }
        Ok(Self(out.try_into().unwrap()))
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| ScenarioError::io(path, e))?)
    }

    pub fn to_json(&self) -> String {
        let map: BTreeMap<&str, ComponentProperties> = COMPONENT_NAMES.iter().copied().zip(self.0).collect();
        serde_json::to_string_pretty(&map).unwrap()
    }
}

impl Default for ComponentTable {
    fn default() -> Self {
        Self::from_json(DEFAULT_TABLE).expect("bundled component table is valid")
    }
}
