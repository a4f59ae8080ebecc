//! JSON scenario files: grid, rock fields, fluid, wells, initial state and
//! time grid. Every field except the grid size has a default.

use std::path::{Path, PathBuf};

use podnewton::{PiecewiseConstantSignal, TimeGrid};
use serde::{Deserialize, Serialize};

use crate::components::{ComponentTable, NC};
use crate::error::ScenarioError;
use crate::grid::{CartesianGrid, FieldSpec};
use crate::model::{Fluid, ReservoirModel, Well, NV, SECONDS_PER_DAY};
use crate::thermo::{
    CoreyParams, OilViscosityModel, DEFAULT_TEMPERATURE, DEFAULT_WATER_MOLAR_VOLUME, DEFAULT_WATER_VISCOSITY,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub grid: GridSpec,
    #[serde(default = "default_field")]
    pub field: FieldSpec,
    #[serde(default)]
    pub fluid: FluidSpec,
    #[serde(default = "default_wells")]
    pub wells: Vec<WellSpec>,
    /// Pressure at which well rates are converted to molar rates; the
    /// initial pressure if absent.
    #[serde(default)]
    pub injection_reference_pressure: Option<f64>,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub time: TimeSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    /// Cell size in m.
    #[serde(default = "default_cell_size")]
    pub cell_size: [f64; 3],
    /// Depth of the first cell center, m.
    #[serde(default)]
    pub depth: f64,
    /// Depth increase per m in x and y.
    #[serde(default)]
    pub dip: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidSpec {
    #[serde(default = "default_temperature")]
    pub temperature_k: f64,
    /// Component table file; the bundled table if absent.
    #[serde(default)]
    pub components_file: Option<String>,
    #[serde(default = "default_water_molar_volume")]
    pub water_molar_volume: f64,
    #[serde(default = "default_water_viscosity")]
    pub water_viscosity: f64,
    #[serde(default = "default_water_density")]
    pub water_density: f64,
    #[serde(default)]
    pub corey: CoreyParams,
    #[serde(default)]
    pub oil_viscosity: OilViscosityModel,
}

impl Default for FluidSpec {
    fn default() -> Self {
        Self {
            temperature_k: default_temperature(),
            components_file: None,
            water_molar_volume: default_water_molar_volume(),
            water_viscosity: default_water_viscosity(),
            water_density: default_water_density(),
            corey: CoreyParams::default(),
            oil_viscosity: OilViscosityModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WellSpec {
    /// `[i, j]`; negative values count from the far end (`-1` is the last).
    pub cell: [i64; 2],
    #[serde(default = "default_rate")]
    pub rate_m3_per_day: f64,
    /// Mole fractions of CH4, nC10, CO2.
    #[serde(default = "default_injection")]
    pub composition: [f64; NC],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default = "default_pressure")]
    pub pressure: f64,
    #[serde(default = "default_sw")]
    pub water_saturation: f64,
    #[serde(default = "default_oil")]
    pub oil_composition: [f64; NC],
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self { pressure: default_pressure(), water_saturation: default_sw(), oil_composition: default_oil() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub steps: usize,
    pub dt_days: f64,
}

impl Default for TimeSpec {
    /// 40 steps of 0.1 day, then 20 steps of 0.2 day.
    fn default() -> Self {
        Self { segments: vec![Segment { steps: 40, dt_days: 0.1 }, Segment { steps: 20, dt_days: 0.2 }] }
    }
}

fn default_field() -> FieldSpec {
    FieldSpec::synthetic(1)
}
fn default_cell_size() -> [f64; 3] {
    // 10 ft x 20 ft x 2 ft
    [3.048, 6.096, 0.6096]
}
fn default_temperature() -> f64 {
    DEFAULT_TEMPERATURE
}
fn default_water_molar_volume() -> f64 {
    DEFAULT_WATER_MOLAR_VOLUME
}
fn default_water_viscosity() -> f64 {
    DEFAULT_WATER_VISCOSITY
}
fn default_water_density() -> f64 {
    1000.0
}
fn default_rate() -> f64 {
    0.11
}
fn default_injection() -> [f64; NC] {
    [0.001, 0.001, 0.998]
}
fn default_wells() -> Vec<WellSpec> {
    vec![
        WellSpec { cell: [0, 0], rate_m3_per_day: default_rate(), composition: default_injection() },
        WellSpec { cell: [-1, -1], rate_m3_per_day: default_rate(), composition: default_injection() },
    ]
}
fn default_pressure() -> f64 {
    1.0e7
}
fn default_sw() -> f64 {
    0.3
}
fn default_oil() -> [f64; NC] {
    [0.2, 0.8, 0.0]
}

/// A scenario ready for simulation.
#[derive(Debug, Clone)]
pub struct BuiltScenario {
    pub model: ReservoirModel,
    pub x0: Vec<f64>,
    pub time_grid: TimeGrid,
    /// Per-well rates in m³/day, held constant.
    pub inputs: PiecewiseConstantSignal,
    pub disturbances: PiecewiseConstantSignal,
}

impl Scenario {
    /// `nx × ny` cells with every other setting at its default.
    pub fn with_size(nx: usize, ny: usize) -> Self {
        Self {
            grid: GridSpec { nx, ny, cell_size: default_cell_size(), depth: 0.0, dip: [0.0, 0.0] },
            field: default_field(),
            fluid: FluidSpec::default(),
            wells: default_wells(),
            injection_reference_pressure: None,
            initial: InitialSpec::default(),
            time: TimeSpec::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap()
    }

    /// Reads a scenario; relative file references resolve against its directory.
    pub fn load(path: &Path) -> Result<(Self, PathBuf), ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::from_json(&text)?, base))
    }

    pub fn cell_count(&self) -> usize {
        self.grid.nx * self.grid.ny
    }

    fn well_cell(&self, w: &WellSpec) -> Result<usize, ScenarioError> {
        let resolve = |v: i64, n: usize| -> Option<usize> {
            let idx = if v < 0 { n as i64 + v } else { v };
            (0..n as i64).contains(&idx).then_some(idx as usize)
        };
        match (resolve(w.cell[0], self.grid.nx), resolve(w.cell[1], self.grid.ny)) {
            (Some(i), Some(j)) => Ok(i + self.grid.nx * j),
            _ => Err(ScenarioError::Invalid(format!("well cell {:?} outside the grid", w.cell))),
        }
    }

    pub fn build(&self, base_dir: &Path) -> Result<BuiltScenario, ScenarioError> {
        let g = &self.grid;
        let (porosity, permeability) = self.field.generate(g.nx, g.ny, base_dir)?;
        let depth = (0..g.nx * g.ny)
            .map(|c| {
                let (i, j) = ((c % g.nx) as f64, (c / g.nx) as f64);
                g.depth + g.dip[0] * i * g.cell_size[0] + g.dip[1] * j * g.cell_size[1]
            })
            .collect();
        let grid = CartesianGrid::new(g.nx, g.ny, g.cell_size, depth, porosity, permeability)?;

        let f = &self.fluid;
        let components = match &f.components_file {
            Some(p) => ComponentTable::load(&base_dir.join(p))?,
            None => ComponentTable::default(),
        };
        for (name, v) in [
            ("temperature", f.temperature_k),
            ("water molar volume", f.water_molar_volume),
            ("water viscosity", f.water_viscosity),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ScenarioError::Invalid(format!("{name} must be positive")));
            }
        }
        let c = &f.corey;
        if !(c.residual_water >= 0.0 && c.residual_oil >= 0.0 && c.residual_water + c.residual_oil < 1.0)
            || !(c.water_exponent > 0.0 && c.oil_exponent > 0.0)
        {
            return Err(ScenarioError::Invalid("Corey parameters out of range".into()));
        }
        let fluid = Fluid::new(
            components,
            f.temperature_k,
            f.water_molar_volume,
            f.water_viscosity,
            f.water_density,
            f.corey,
            f.oil_viscosity,
        );

        let init = &self.initial;
        check_fractions("initial oil composition", &init.oil_composition)?;
        if !(init.water_saturation >= 0.0 && init.water_saturation < 1.0) || !(init.pressure > 0.0) {
            return Err(ScenarioError::Invalid("initial saturation or pressure out of range".into()));
        }
        let p_ref = self.injection_reference_pressure.unwrap_or(init.pressure);
        let pr = fluid.peng_robinson();
        let mut wells = Vec::with_capacity(self.wells.len());
        for w in &self.wells {
            check_fractions("well composition", &w.composition)?;
            if !(w.rate_m3_per_day >= 0.0 && w.rate_m3_per_day.is_finite()) {
                return Err(ScenarioError::Invalid(format!("negative well rate {}", w.rate_m3_per_day)));
            }
            wells.push(Well {
                cell: self.well_cell(w)?,
                rate: w.rate_m3_per_day,
                composition: w.composition,
                reference_molar_volume: pr.liquid_molar_volume(p_ref, &w.composition)?,
            });
        }

        let v_oil = pr.liquid_molar_volume(init.pressure, &init.oil_composition)?;
        let mut x0 = Vec::with_capacity(NV * grid.cell_count());
        for &phi in grid.porosity() {
            let pore = phi * grid.cell_volume();
            let n_oil = (1.0 - init.water_saturation) * pore / v_oil;
            x0.push(init.water_saturation * pore / fluid.water_molar_volume);
            x0.extend(init.oil_composition.iter().map(|y| y * n_oil));
        }

        let segments: Vec<(usize, f64)> = self.time.segments.iter().map(|s| (s.steps, s.dt_days * SECONDS_PER_DAY)).collect();
        let time_grid = TimeGrid::from_segments(&segments).map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        if time_grid.is_empty() {
            return Err(ScenarioError::Invalid("time grid has no steps".into()));
        }
        // inputs are held beyond the horizon so sub-steps never fall off the end
        let t_end = time_grid.end() + SECONDS_PER_DAY;
        let model = ReservoirModel::new(grid, fluid, wells);
        let inputs = PiecewiseConstantSignal::constant(0.0, t_end, model.scheduled_rates())
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        let disturbances = PiecewiseConstantSignal::empty(0.0, t_end).map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        Ok(BuiltScenario { model, x0, time_grid, inputs, disturbances })
    }
}

fn check_fractions(what: &str, y: &[f64; NC]) -> Result<(), ScenarioError> {
    if y.iter().any(|v| !(*v >= 0.0)) || (y.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(ScenarioError::Invalid(format!("{what} {y:?} must be non-negative and sum to 1")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_json_uses_defaults() {
        let s = Scenario::from_json(r#"{"grid": {"nx": 4, "ny": 3}}"#).unwrap();
        assert_eq!(s, Scenario::with_size(4, 3));
        assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(Scenario::from_json(r#"{"grid": {"nx": 4, "ny": 3}, "colour": 1}"#).is_err());
    }

    #[test]
    fn default_build_has_two_segment_schedule_and_corner_wells() {
        let b = Scenario::with_size(5, 3).build(Path::new(".")).unwrap();
        assert_eq!(b.time_grid.len(), 60);
        assert!((b.time_grid.end() - 8.0 * SECONDS_PER_DAY).abs() < 1e-6);
        let cells: Vec<usize> = b.model.wells().iter().map(|w| w.cell).collect();
        assert_eq!(cells, vec![0, 14]);
        assert_eq!(b.x0.len(), 60);
    }

    #[test]
    fn initial_state_has_initial_pressure() {
        let b = Scenario::with_size(3, 2).build(Path::new(".")).unwrap();
        for p in b.model.pressures(&b.x0).unwrap() {
            assert!((p - 1e7).abs() < 1e-3, "{p}");
        }
    }

    #[test]
    fn invalid_wells_are_rejected() {
        let mut s = Scenario::with_size(3, 3);
        s.wells[0].cell = [3, 0];
        assert!(s.build(Path::new(".")).is_err());
        let mut s = Scenario::with_size(3, 3);
        s.wells[0].composition = [0.5, 0.6, 0.0];
        assert!(s.build(Path::new(".")).is_err());
    }
}
