//! A two-phase (water and oil) compositional reservoir model on a single
//! Cartesian layer. The oil phase carries methane, n-decane and CO2 and its
//! pressure follows from the Peng-Robinson equation of state through the
//! pore-volume balance. CO2-rich fluid is injected at fixed volumetric rates
//! into a closed reservoir.

pub mod components;
pub mod dual;
pub mod error;
pub mod grid;
pub mod model;
pub mod scenario;
pub mod thermo;

pub use components::{ComponentProperties, ComponentTable, COMPONENT_NAMES, NC};
pub use error::{ScenarioError, ThermoError};
pub use grid::{CartesianGrid, FieldSpec};
pub use model::{Fluid, ReservoirModel, Well, NV};
pub use scenario::{BuiltScenario, Scenario};
