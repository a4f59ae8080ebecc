//! Snapshot matrices and proper orthogonal decomposition (POD) bases.

use faer::{Mat, MatRef};

use crate::error::PodError;

/// `50 · 2^-52`: singular values at or below this fraction of the largest
/// one are discarded.
pub const DEFAULT_POD_THRESHOLD: f64 = 50.0 * f64::EPSILON;

/// States `x_{k_h}, …, x_k` stored as the columns of a dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix {
    nrows: usize,
    first_index: usize,
    data: Vec<f64>,
}

impl SnapshotMatrix {
    /// Column-major `nrows × (data.len() / nrows)` snapshots whose first
    /// column is the state at time index `first_index`.
    pub fn from_columns(nrows: usize, first_index: usize, data: Vec<f64>) -> Self {
        assert!(nrows > 0 && data.len().is_multiple_of(nrows) && !data.is_empty());
        Self { nrows, first_index, data }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.data.len() / self.nrows
    }

    /// Time indices of the columns, in order.
    pub fn time_indices(&self) -> std::ops::Range<usize> {
        self.first_index..self.first_index + self.ncols()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn as_mat(&self) -> MatRef<'_, f64> {
        MatRef::from_column_major_slice(&self.data, self.nrows, self.ncols())
    }
}

/// First snapshot index `k_h = max{0, k - N_h + 1}` of the window ending at `k`.
pub fn window_start(k: usize, window: usize) -> usize {
    (k + 1).saturating_sub(window)
}

/// Snapshot matrix `[x_{k_h} … x_k]` from a state history indexed from 0.
pub fn build_snapshot_matrix<S: AsRef<[f64]>>(history: &[S], k: usize, window: usize) -> Result<SnapshotMatrix, PodError> {
    if history.is_empty() {
        return Err(PodError::EmptyHistory);
    }
    if window == 0 {
        return Err(PodError::ZeroWindow);
    }
    if k >= history.len() {
        return Err(PodError::IndexOutOfRange { index: k, len: history.len() });
    }
    let start = window_start(k, window);
    let nrows = history[start].as_ref().len();
    let mut data = Vec::with_capacity(nrows * (k + 1 - start));
    for state in &history[start..=k] {
        let state = state.as_ref();
        if state.len() != nrows || nrows == 0 {
            return Err(PodError::RaggedHistory);
        }
        data.extend_from_slice(state);
    }
    Ok(SnapshotMatrix::from_columns(nrows, start, data))
}

/// Orthonormal basis `V` (with `W = V`) of dimension `n_x × n_r`.
pub const ROW_STRIDE_ALIGN: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionBasis {
    nrows: usize,
    data: Vec<f64>,
    /// Row-major copy of `data`, rows padded to [`ROW_STRIDE_ALIGN`].
    rows: Vec<f64>,
    singular_values: Vec<f64>,
    discarded: Vec<f64>,
    threshold: f64,
}

impl ProjectionBasis {
    /// Wraps caller-supplied orthonormal columns (not checked beyond shape).
    pub fn from_orthonormal_columns(columns: &[Vec<f64>]) -> Self {
        assert!(!columns.is_empty());
        let nrows = columns[0].len();
        assert!(columns.iter().all(|c| c.len() == nrows));
        Self::new(nrows, columns.concat(), Vec::new(), Vec::new(), f64::NAN)
    }

    fn new(nrows: usize, data: Vec<f64>, singular_values: Vec<f64>, discarded: Vec<f64>, threshold: f64) -> Self {
        let stride = (data.len() / nrows).next_multiple_of(ROW_STRIDE_ALIGN);
        let mut rows = vec![0.0; nrows * stride];
        for (j, col) in data.chunks(nrows).enumerate() {
            for (i, v) in col.iter().enumerate() {
                rows[i * stride + j] = *v;
            }
        }
        Self { nrows, data, rows, singular_values, discarded, threshold }
    }

    /// Full-order dimension `n_x`.
    pub fn dim(&self) -> usize {
        self.nrows
    }

    /// Reduced dimension `n_r`.
    pub fn rank(&self) -> usize {
        self.data.len() / self.nrows
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    /// Column-major `n_x × n_r` storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Row `i` of V, zero-padded to [`row_stride`](Self::row_stride) entries.
    pub fn padded_row(&self, i: usize) -> &[f64] {
        let s = self.row_stride();
        &self.rows[i * s..(i + 1) * s]
    }

    /// All padded rows, back to back.
    pub fn padded_rows(&self) -> &[f64] {
        &self.rows
    }

    pub fn row_stride(&self) -> usize {
        self.rank().next_multiple_of(ROW_STRIDE_ALIGN)
    }

    pub fn as_mat(&self) -> MatRef<'_, f64> {
        MatRef::from_column_major_slice(&self.data, self.nrows, self.rank())
    }

    /// Retained singular values, descending. Empty for caller-supplied bases.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn discarded_singular_values(&self) -> &[f64] {
        &self.discarded
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// `out = V y`.
    pub fn expand(&self, y: &[f64], out: &mut [f64]) {
        assert_eq!(y.len(), self.rank());
        assert_eq!(out.len(), self.nrows);
        out.fill(0.0);
        for (j, &yj) in y.iter().enumerate() {
            for (o, v) in out.iter_mut().zip(self.column(j)) {
                *o += v * yj;
            }
        }
    }

    /// `Vᵀ x`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        (0..self.rank())
            .map(|j| self.column(j).iter().zip(x).map(|(v, xi)| v * xi).sum())
            .collect()
    }
}

/// POD basis of `snapshots`: the left singular vectors whose singular values
/// exceed `threshold · σ_1`. Each column is signed so that its
/// largest-magnitude entry is positive.
pub fn compute_pod_basis(snapshots: &SnapshotMatrix, threshold: f64) -> Result<ProjectionBasis, PodError> {
    let x = snapshots.as_mat();
    if x.col_iter().all(|c| c.iter().all(|&v| v == 0.0)) {
        return Err(PodError::ZeroSnapshots);
    }
    let svd = x.thin_svd().map_err(|e| PodError::Svd(format!("{e:?}")))?;
    let s = svd.S().column_vector();
    let u = svd.U();

    let mut order: Vec<usize> = (0..s.nrows()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let sigma_max = s[order[0]];
    if !(sigma_max > 0.0) || !sigma_max.is_finite() {
        return Err(PodError::ZeroSnapshots);
    }
    let cutoff = threshold * sigma_max;

    let n = snapshots.nrows();
    let mut data = Vec::new();
    let mut kept = Vec::new();
    let mut discarded = Vec::new();
    for &j in &order {
        if s[j] > cutoff {
            kept.push(s[j]);
            let col = u.col(j);
            let mut pivot = 0;
            for i in 1..n {
                if col[i].abs() > col[pivot].abs() {
                    pivot = i;
                }
            }
            let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
            data.extend(col.iter().map(|v| sign * v));
        } else {
            discarded.push(s[j]);
        }
    }
    Ok(ProjectionBasis::new(n, data, kept, discarded, threshold))
}

/// `max |VᵀV - I|`.
pub fn orthonormality_error(basis: &ProjectionBasis) -> f64 {
    let v = basis.as_mat();
    let gram: Mat<f64> = v.transpose() * v;
    let mut err: f64 = 0.0;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            err = err.max((gram[(i, j)] - target).abs());
        }
    }
    err
}
