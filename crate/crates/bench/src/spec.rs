//! Benchmark specification files and sweep planning.

use std::path::{Path, PathBuf};

use podnewton::Method;
use podnewton_reservoir::scenario::TimeSpec;
use podnewton_reservoir::{FieldSpec, Scenario};
use serde::{Deserialize, Serialize};

use crate::error::BenchError;

/// Cell counts of the default sweep, each with [`DEFAULT_ROWS`] rows.
pub const DEFAULT_SIZES: [usize; 5] = [75, 150, 300, 600, 1200];
pub const DEFAULT_ROWS: usize = 15;
/// Rows of the large sweep selected by [`BenchmarkSpec::full_scale`].
pub const FULL_SCALE_ROWS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSpec {
    /// Base scenario file, relative to the spec file. The built-in default
    /// scenario when absent. Its grid size is replaced by each sweep point.
    #[serde(default)]
    pub scenario: Option<PathBuf>,
    /// Cell counts to simulate.
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    /// Grid rows; a sweep point with `c` cells uses `c / rows` columns.
    #[serde(default = "default_rows")]
    pub rows: usize,
    /// Replaces the scenario's time grid.
    #[serde(default)]
    pub time: Option<TimeSpec>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_methods", with = "method_names")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub strict: bool,
    /// Replaces the seed of a synthetic rock field.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_sizes() -> Vec<usize> {
    DEFAULT_SIZES.to_vec()
}
fn default_rows() -> usize {
    DEFAULT_ROWS
}
fn default_repetitions() -> usize {
    1
}
fn default_methods() -> Vec<Method> {
    vec![Method::Newton, Method::NewtonLike]
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        Self {
            scenario: None,
            sizes: default_sizes(),
            rows: default_rows(),
            time: None,
            repetitions: default_repetitions(),
            methods: default_methods(),
            strict: false,
            seed: None,
            out: None,
        }
    }
}

/// One grid of the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub cells: usize,
    pub columns: usize,
    pub rows: usize,
}

impl SweepPoint {
    pub fn n_x(&self) -> usize {
        podnewton_reservoir::NV * self.cells
    }
}

impl BenchmarkSpec {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap()
    }

    /// Reads a spec and returns it with the directory it was read from.
    pub fn load(path: &Path) -> Result<(Self, PathBuf), BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::from_json(&text)?, base))
    }

    /// 1200 to 13200 cells in steps of 1200, on 60 rows.
    pub fn full_scale(mut self) -> Self {
        self.sizes = (1..=11).map(|i| 1200 * i).collect();
        self.rows = FULL_SCALE_ROWS;
        self
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let invalid = |m: String| Err(BenchError::InvalidSpec(m));
        if self.repetitions == 0 {
            return invalid("repetitions must be at least 1".into());
        }
        if self.rows == 0 {
            return invalid("rows must be at least 1".into());
        }
        if self.sizes.is_empty() || self.methods.is_empty() {
            return invalid("sizes and methods must not be empty".into());
        }
        self.plan().map(|_| ())
    }

    /// Grid of every sweep point. A size smaller than `rows` becomes a
    /// single row; other sizes must be multiples of `rows`.
    pub fn plan(&self) -> Result<Vec<SweepPoint>, BenchError> {
        self.sizes
            .iter()
            .map(|&cells| {
                if cells == 0 {
                    return Err(BenchError::InvalidSpec("grid sizes must be positive".into()));
                }
                let rows = if cells < self.rows { 1 } else { self.rows };
                if cells % rows != 0 {
                    return Err(BenchError::InvalidSpec(format!("{cells} cells is not a multiple of {rows} rows")));
                }
                Ok(SweepPoint { cells, columns: cells / rows, rows })
            })
            .collect()
    }

    /// The base scenario with the spec's time grid and seed applied.
    pub fn base_scenario(&self, spec_dir: &Path) -> Result<(Scenario, PathBuf), BenchError> {
        let (mut s, base) = match &self.scenario {
            Some(p) => Scenario::load(&spec_dir.join(p))?,
            None => (Scenario::with_size(1, 1), spec_dir.to_path_buf()),
        };
        if let Some(t) = &self.time {
            s.time = t.clone();
        }
        if let Some(seed) = self.seed {
            apply_seed(&mut s, seed);
        }
        Ok((s, base))
    }
}

/// Sets the seed of a synthetic field; other fields are left alone.
pub fn apply_seed(scenario: &mut Scenario, new_seed: u64) {
    if let FieldSpec::Synthetic { seed, .. } = &mut scenario.field {
        *seed = new_seed;
    }
}

/// `scenario` resized to the sweep point.
pub fn resize(scenario: &Scenario, point: SweepPoint) -> Scenario {
    let mut s = scenario.clone();
    s.grid.nx = point.columns;
    s.grid.ny = point.rows;
    s
}

pub(crate) mod method_names {
    use podnewton::Method;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(methods: &[Method], s: S) -> Result<S::Ok, S::Error> {
        methods.iter().map(|m| m.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Method>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

pub(crate) mod method_name {
    use podnewton::Method;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(method: &Method, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(method)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Method, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_plan_is_fifteen_rows() {
        let plan = BenchmarkSpec::default().plan().unwrap();
        let cols: Vec<usize> = plan.iter().map(|p| p.columns).collect();
        assert_eq!(cols, [5, 10, 20, 40, 80]);
        assert!(plan.iter().all(|p| p.rows == 15));
        assert_eq!(plan[4].n_x(), 4800);
    }

    #[test]
    fn full_scale_plan() {
        let plan = BenchmarkSpec::default().full_scale().plan().unwrap();
        assert_eq!(plan.len(), 11);
        assert_eq!(plan[0], SweepPoint { cells: 1200, columns: 20, rows: 60 });
        assert_eq!(plan[10], SweepPoint { cells: 13200, columns: 220, rows: 60 });
    }

    #[test]
    fn small_and_odd_sizes() {
        let spec = BenchmarkSpec { sizes: vec![1, 7], ..Default::default() };
        assert_eq!(spec.plan().unwrap(), [SweepPoint { cells: 1, columns: 1, rows: 1 }, SweepPoint { cells: 7, columns: 7, rows: 1 }]);
        let bad = BenchmarkSpec { sizes: vec![100], ..Default::default() };
        assert!(bad.validate().is_err());
        let zero = BenchmarkSpec { repetitions: 0, ..Default::default() };
        assert!(zero.validate().is_err());
    }

    #[test]
    fn json_defaults_and_round_trip() {
        let spec = BenchmarkSpec::from_json(r#"{"sizes": [300], "methods": ["newton-like"]}"#).unwrap();
        assert_eq!(spec.methods, [Method::NewtonLike]);
        assert_eq!((spec.rows, spec.repetitions), (15, 1));
        assert_eq!(BenchmarkSpec::from_json(&spec.to_json()).unwrap(), spec);
        assert!(BenchmarkSpec::from_json(r#"{"methods": ["gauss"]}"#).is_err());
        assert!(BenchmarkSpec::from_json(r#"{"size": [3]}"#).is_err());
    }
}
