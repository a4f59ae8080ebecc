//! Running scenarios and benchmark sweeps.

use std::path::Path;

use podnewton::{default_driver_settings, simulate, DriverSettings, Method, SimulationError, SimulationResult};
use podnewton_reservoir::{BuiltScenario, Scenario};
use rayon::prelude::*;

use crate::error::BenchError;
use crate::rows::BenchmarkRow;
use crate::spec::{resize, BenchmarkSpec, SweepPoint};

/// Default driver settings for `n_x` states with the given method.
pub fn driver_settings(n_x: usize, method: Method, strict: bool) -> DriverSettings {
    DriverSettings { method, strict, ..default_driver_settings(n_x) }
}

pub fn simulate_built(built: &BuiltScenario, method: Method, strict: bool) -> Result<SimulationResult, SimulationError> {
    let settings = driver_settings(built.x0.len(), method, strict);
    simulate(&built.model, &built.x0, &built.time_grid, &built.inputs, &built.disturbances, &settings)
}

fn run_job(scenario: &Scenario, base: &Path, point: SweepPoint, method: Method, repetition: usize, strict: bool) -> BenchmarkRow {
    let built = match resize(scenario, point).build(base) {
        Ok(b) => b,
        Err(e) => return BenchmarkRow::failed(point, method, repetition, e.to_string()),
    };
    match simulate_built(&built, method, strict) {
        Ok(result) => BenchmarkRow::from_result(point, method, repetition, &result),
        Err(e) => BenchmarkRow::failed(point, method, repetition, e.to_string()),
    }
}

/// Runs every sweep point × repetition × method and returns one row per
/// run, in that order. With `threads > 1` runs share a thread pool and
/// their rows are marked as indicative timings. A failed run yields a row
/// carrying the error instead of aborting the sweep.
pub fn run_benchmark(spec: &BenchmarkSpec, spec_dir: &Path, threads: usize) -> Result<Vec<BenchmarkRow>, BenchError> {
    spec.validate()?;
    let plan = spec.plan()?;
    let (scenario, base) = spec.base_scenario(spec_dir)?;
    let jobs: Vec<(SweepPoint, usize, Method)> = plan
        .iter()
        .flat_map(|&p| (0..spec.repetitions).flat_map(move |r| spec.methods.iter().map(move |&m| (p, r, m))))
        .collect();
    let run = |&(p, r, m): &(SweepPoint, usize, Method)| run_job(&scenario, &base, p, m, r, spec.strict);
    if threads <= 1 {
        return Ok(jobs.iter().map(run).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| BenchError::ThreadPool(e.to_string()))?;
    let mut rows: Vec<BenchmarkRow> = pool.install(|| jobs.par_iter().map(run).collect());
    for r in &mut rows {
        r.timing_indicative = true;
    }
    Ok(rows)
}
