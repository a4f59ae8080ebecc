//! One CSV row per simulation run.

use std::io::{Read, Write};

use podnewton::{Method, SimulationResult};
use serde::{Deserialize, Serialize};

use crate::error::BenchError;
use crate::spec::{method_name, SweepPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub cells: usize,
    pub columns: usize,
    pub rows: usize,
    pub n_x: usize,
    #[serde(with = "method_name")]
    pub method: Method,
    pub repetition: usize,
    /// Simulation time only: no scenario construction or I/O. NaN for a
    /// failed run.
    pub wall_clock_s: f64,
    pub iterations: usize,
    pub reduced_solves: usize,
    pub full_solves: usize,
    pub fallbacks: usize,
    /// Largest final residual norm over all accepted steps.
    pub max_residual: f64,
    /// Euclidean norm of the final state.
    pub checksum: f64,
    /// FNV-1a hash of the bit patterns of the whole trajectory.
    pub trajectory_hash: String,
    /// Set when runs shared the machine with other runs.
    pub timing_indicative: bool,
    pub error: Option<String>,
}

impl BenchmarkRow {
    pub fn from_result(point: SweepPoint, method: Method, repetition: usize, result: &SimulationResult) -> Self {
        Self {
            cells: point.cells,
            columns: point.columns,
            rows: point.rows,
            n_x: result.trajectory[0].len(),
            method,
            repetition,
            wall_clock_s: result.wall_time.as_secs_f64(),
            iterations: result.total_iterations(),
            reduced_solves: result.total_reduced_solves(),
            full_solves: result.total_full_solves(),
            fallbacks: result.fallback_count(),
            max_residual: result.reports.iter().map(|r| r.residual_norm).fold(0.0, f64::max),
            checksum: norm(result.final_state()),
            trajectory_hash: format!("{:016x}", trajectory_hash(&result.trajectory)),
            timing_indicative: false,
            error: None,
        }
    }

    pub fn failed(point: SweepPoint, method: Method, repetition: usize, message: String) -> Self {
        Self {
            cells: point.cells,
            columns: point.columns,
            rows: point.rows,
            n_x: point.n_x(),
            method,
            repetition,
            wall_clock_s: f64::NAN,
            iterations: 0,
            reduced_solves: 0,
            full_solves: 0,
            fallbacks: 0,
            max_residual: f64::NAN,
            checksum: f64::NAN,
            trajectory_hash: String::new(),
            timing_indicative: false,
            error: Some(message),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// 64-bit FNV-1a over the little-endian bytes of every entry.
pub fn trajectory_hash(trajectory: &[Vec<f64>]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in trajectory.iter().flatten() {
        for b in v.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

pub fn write_rows<W: Write>(writer: W, rows: &[BenchmarkRow]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_rows<R: Read>(reader: R) -> Result<Vec<BenchmarkRow>, BenchError> {
    let mut r = csv::Reader::from_reader(reader);
    Ok(r.deserialize().collect::<Result<Vec<_>, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_sees_every_bit() {
        let a = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        let mut b = a.clone();
        b[1][1] = f64::from_bits(4.0f64.to_bits() + 1);
        assert_ne!(trajectory_hash(&a), trajectory_hash(&b));
        assert_eq!(trajectory_hash(&a), trajectory_hash(&a.clone()));
        // empty input is the FNV offset basis
        assert_eq!(trajectory_hash(&[]), 0xcbf2_9ce4_8422_2325);
    }
}
