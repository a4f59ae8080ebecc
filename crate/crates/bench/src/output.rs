//! Files written to an output directory.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use podnewton::driver::Fallback;
use podnewton::export::{write_binary, write_csv};
use podnewton::{DriverSettings, SimulationResult, StepReport};
use podnewton_reservoir::Scenario;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::BenchError;
use crate::rows::{write_rows, BenchmarkRow};
use crate::speedup::{write_speedup, SpeedupReport};
use crate::spec::{BenchmarkSpec, SweepPoint};

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, BenchError> {
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).map_err(|e| BenchError::io(&path, e))
}

pub fn write_json(dir: &Path, name: &str, value: &Value) -> Result<(), BenchError> {
    serde_json::to_writer_pretty(create(dir, name)?, value)?;
    Ok(())
}

pub fn settings_json(s: &DriverSettings) -> Value {
    json!({
        "method": s.method.to_string(),
        "bootstrap_steps": s.bootstrap_steps,
        "snapshot_window": s.snapshot_window,
        "tolerance": s.tolerance,
        "stagnation_tolerance": s.stagnation_tolerance,
        "max_iterations": s.max_iterations,
        "strict": s.strict,
        "pod_threshold": s.pod_threshold,
    })
}

pub fn error_json(err: &BenchError) -> Value {
    json!({ "error": { "kind": err.kind(), "message": err.to_string() } })
}

/// One line per accepted step of a simulation.
#[derive(Debug, Serialize)]
struct StepRecord {
    step: usize,
    t: f64,
    dt: f64,
    method: String,
    iterations: usize,
    reduced_solves: usize,
    full_solves: usize,
    residual_norm: f64,
    basis_rank: Option<usize>,
    fallback: String,
    substeps: usize,
    wall_time_s: f64,
    pod_time_s: f64,
    full_solve_time_s: f64,
}

impl From<&StepReport> for StepRecord {
    fn from(r: &StepReport) -> Self {
        Self {
            step: r.step,
            t: r.t,
            dt: r.dt,
            method: r.method.to_string(),
            iterations: r.iterations,
            reduced_solves: r.reduced_solves,
            full_solves: r.full_solves,
            residual_norm: r.residual_norm,
            basis_rank: r.basis_rank,
            fallback: match r.fallback {
                None => String::new(),
                Some(Fallback::NewtonRetry) => "newton-retry".into(),
                Some(Fallback::Halving { halvings }) => format!("halving-{halvings}"),
            },
            substeps: r.substeps,
            wall_time_s: r.wall_time.as_secs_f64(),
            pod_time_s: r.pod_time.as_secs_f64(),
            full_solve_time_s: r.full_solve_time.as_secs_f64(),
        }
    }
}

/// `trajectory.bin`, `trajectory.csv`, `steps.csv`, and `results.csv` with
/// the single row of the run. A partial result from a failed run is
/// written the same way.
pub fn write_simulation(dir: &Path, result: &SimulationResult, row: Option<&BenchmarkRow>) -> Result<(), BenchError> {
    write_binary(create(dir, "trajectory.bin")?, &result.trajectory)?;
    write_csv(create(dir, "trajectory.csv")?, &result.times, &result.trajectory)?;
    let mut w = csv::Writer::from_writer(create(dir, "steps.csv")?);
    for r in &result.reports {
        w.serialize(StepRecord::from(r))?;
    }
    w.flush().map_err(csv::Error::from)?;
    if let Some(row) = row {
        write_rows(create(dir, "results.csv")?, std::slice::from_ref(row))?;
    }
    Ok(())
}

pub fn simulation_run_json(scenario: &Scenario, settings: &DriverSettings, row: Option<&BenchmarkRow>) -> Value {
    json!({
        "command": "simulate",
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": scenario,
        "settings": settings_json(settings),
        "result": row,
    })
}

/// `results.csv`, `speedup.csv` and `run.json`.
pub fn write_benchmark(
    dir: &Path,
    spec: &BenchmarkSpec,
    scenario: &Scenario,
    plan: &[SweepPoint],
    rows: &[BenchmarkRow],
    report: &SpeedupReport,
    threads: usize,
) -> Result<(), BenchError> {
    write_rows(create(dir, "results.csv")?, rows)?;
    write_speedup(create(dir, "speedup.csv")?, report)?;
    let settings: Vec<Value> = plan
        .iter()
        .map(|p| {
            let s = crate::run::driver_settings(p.n_x(), podnewton::Method::NewtonLike, spec.strict);
            json!({ "cells": p.cells, "columns": p.columns, "rows": p.rows, "n_x": p.n_x(), "settings": settings_json(&s) })
        })
        .collect();
    let run = json!({
        "command": "bench",
        "version": env!("CARGO_PKG_VERSION"),
        "spec": spec,
        "base_scenario": scenario,
        "threads": threads,
        "timing_indicative": threads > 1,
        "points": settings,
        "speedup": report,
    });
    write_json(dir, "run.json", &run)
}
