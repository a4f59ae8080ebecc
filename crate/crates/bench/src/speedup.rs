//! Speedup of the Newton-like method over Newton per grid size.

use std::collections::BTreeMap;
use std::io::Write;

use podnewton::Method;
use serde::Serialize;

use crate::error::BenchError;
use crate::rows::BenchmarkRow;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedupRow {
    pub cells: usize,
    /// Median wall-clock over successful repetitions.
    pub newton_s: f64,
    pub newton_like_s: f64,
    /// `(t_newton − t_newton_like) / t_newton`.
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedupReport {
    pub sizes: Vec<SpeedupRow>,
    pub mean: Option<f64>,
    /// Sample standard deviation (divisor n − 1); needs two sizes.
    pub std_dev: Option<f64>,
    pub warnings: Vec<String>,
}

pub fn speedup(t_newton: f64, t_newton_like: f64) -> f64 {
    (t_newton - t_newton_like) / t_newton
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 { values[m] } else { 0.5 * (values[m - 1] + values[m]) })
}

pub fn mean_and_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (None, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = (n > 1).then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt());
    (Some(mean), std)
}

/// Pairs the median Newton and Newton-like times of every size. Sizes
/// without a successful run of both methods are skipped with a warning.
pub fn compute_speedup(rows: &[BenchmarkRow]) -> SpeedupReport {
    let mut times: BTreeMap<usize, [Vec<f64>; 2]> = BTreeMap::new();
    for r in rows {
        let slot = times.entry(r.cells).or_default();
        if r.is_ok() {
            slot[(r.method == Method::NewtonLike) as usize].push(r.wall_clock_s);
        }
    }
    let mut report = SpeedupReport { sizes: Vec::new(), mean: None, std_dev: None, warnings: Vec::new() };
    for (cells, [mut newton, mut newton_like]) in times {
        match (median(&mut newton), median(&mut newton_like)) {
            (Some(a), Some(b)) => {
                report.sizes.push(SpeedupRow { cells, newton_s: a, newton_like_s: b, speedup: speedup(a, b) })
            }
            (a, _) => {
                let missing = if a.is_none() { "newton" } else { "newton-like" };
                report.warnings.push(format!("{cells} cells: no successful {missing} run, size omitted"));
            }
        }
    }
    let values: Vec<f64> = report.sizes.iter().map(|s| s.speedup).collect();
    (report.mean, report.std_dev) = mean_and_std(&values);
    report
}

/// Columns `size,newton_s,newton_like_s,speedup`; after the per-size rows
/// come a `mean` and a `std` row with only the speedup column filled.
pub fn write_speedup<W: Write>(writer: W, report: &SpeedupReport) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["size", "newton_s", "newton_like_s", "speedup"])?;
    for s in &report.sizes {
        w.write_record([s.cells.to_string(), s.newton_s.to_string(), s.newton_like_s.to_string(), s.speedup.to_string()])?;
    }
    let fmt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    w.write_record(["mean", "", "", &fmt(report.mean)])?;
    w.write_record(["std", "", "", &fmt(report.std_dev)])?;
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn definition_examples() {
        assert_eq!(speedup(100.0, 50.0), 0.5);
        assert_eq!(speedup(3.0, 3.0), 0.0);
    }

    #[test]
    fn medians() {
        assert_eq!(median(&mut []), None);
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), Some(2.5));
    }
}
