//! Benchmark harness for the Newton and Newton-like simulations of the
//! CO2 injection scenario: grid-size sweeps, per-run CSV rows, speedup
//! statistics and output files.

pub mod error;
pub mod output;
pub mod rows;
pub mod run;
pub mod speedup;
pub mod spec;

pub use error::BenchError;
pub use rows::{read_rows, trajectory_hash, write_rows, BenchmarkRow};
pub use run::{driver_settings, run_benchmark, simulate_built};
pub use speedup::{compute_speedup, SpeedupReport, SpeedupRow};
pub use spec::{BenchmarkSpec, SweepPoint};
