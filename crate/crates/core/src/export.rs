//! Trajectory export as CSV (`t, x_1 … x_n` per row) or as a compact binary
//! dump: magic `RNWT1`, `n_x` and `N` as little-endian `u64`, then the
//! `N + 1` states as column-major little-endian `f64`.

use std::io::{Read, Write};

use thiserror::Error;

pub const BINARY_MAGIC: &[u8; 5] = b"RNWT1";

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("malformed trajectory: {0}")]
    Format(String),
}

fn check_shape(times: Option<&[f64]>, trajectory: &[Vec<f64>]) -> Result<usize, ExportError> {
    let n = trajectory.first().map(Vec::len).ok_or_else(|| ExportError::Format("empty trajectory".into()))?;
    if trajectory.iter().any(|x| x.len() != n) {
        return Err(ExportError::Format("states have different lengths".into()));
    }
    if let Some(t) = times {
        if t.len() != trajectory.len() {
            return Err(ExportError::Format(format!("{} times for {} states", t.len(), trajectory.len())));
        }
    }
    Ok(n)
}

/// Header `t,x_1,…,x_n`, one row per time index.
pub fn write_csv<W: Write>(writer: W, times: &[f64], trajectory: &[Vec<f64>]) -> Result<(), ExportError> {
    let n = check_shape(Some(times), trajectory)?;
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x_{i}")));
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(n + 1);
    for (t, x) in times.iter().zip(trajectory) {
        row.clear();
        row.push(t.to_string());
        row.extend(x.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a file written by [`write_csv`] into `(times, trajectory)`.
pub fn read_csv<R: Read>(reader: R) -> Result<(Vec<f64>, Vec<Vec<f64>>), ExportError> {
    let mut r = csv::Reader::from_reader(reader);
    let (mut times, mut traj) = (Vec::new(), Vec::new());
    for record in r.records() {
        let record = record?;
        let mut values = record.iter().map(|s| s.trim().parse::<f64>());
        let t = values
            .next()
            .ok_or_else(|| ExportError::Format("empty row".into()))?
            .map_err(|e| ExportError::Format(e.to_string()))?;
        let x = values.collect::<Result<Vec<_>, _>>().map_err(|e| ExportError::Format(e.to_string()))?;
        times.push(t);
        traj.push(x);
    }
    check_shape(Some(&times), &traj)?;
    Ok((times, traj))
}

pub fn write_binary<W: Write>(mut writer: W, trajectory: &[Vec<f64>]) -> Result<(), ExportError> {
    let n = check_shape(None, trajectory)?;
    writer.write_all(BINARY_MAGIC)?;
    writer.write_all(&(n as u64).to_le_bytes())?;
    writer.write_all(&((trajectory.len() - 1) as u64).to_le_bytes())?;
    for x in trajectory {
        for v in x {
            writer.write_all(&v.to_le_bytes())?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Returns the `N + 1` states of a binary dump.
pub fn read_binary<R: Read>(mut reader: R) -> Result<Vec<Vec<f64>>, ExportError> {
    let mut magic = [0u8; 5];
    reader.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(ExportError::Format("bad magic".into()));
    }
    let mut word = [0u8; 8];
    reader.read_exact(&mut word)?;
    let n = u64::from_le_bytes(word) as usize;
    reader.read_exact(&mut word)?;
    let steps = u64::from_le_bytes(word) as usize;
    let mut traj = Vec::with_capacity(steps + 1);
    for _ in 0..=steps {
        let mut x = Vec::with_capacity(n);
        for _ in 0..n {
            reader.read_exact(&mut word)?;
            x.push(f64::from_le_bytes(word));
        }
        traj.push(x);
    }
    let mut rest = Vec::new();
    reader.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(ExportError::Format(format!("{} trailing bytes", rest.len())));
    }
    Ok(traj)
}
