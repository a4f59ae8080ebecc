//! Compressed sparse column matrices with a fixed symbolic pattern, and a
//! direct LU solver that reuses the symbolic analysis across refactorizations.

use std::sync::Arc;

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::sparse::linalg::lu::{factorize_symbolic_lu, LuRef, NumericLu, SymbolicLu};
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, MatMut, Par};

use crate::error::LinearSolveError;

/// Square sparsity pattern in compressed column form.
///
/// Row indices are sorted within each column and the diagonal is always
/// structurally present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    diag: Vec<usize>,
}

impl SparsityPattern {
    /// Builds an `n × n` pattern from `(row, col)` pairs. Duplicates are
    /// merged and the diagonal is added.
    pub fn from_entries<I>(n: usize, entries: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut cols: Vec<Vec<usize>> = (0..n).map(|c| vec![c]).collect();
        for (r, c) in entries {
            assert!(r < n && c < n, "entry ({r}, {c}) outside {n}x{n} pattern");
            cols[c].push(r);
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        col_ptr.push(0);
        for mut rows in cols {
            rows.sort_unstable();
            rows.dedup();
            row_idx.extend_from_slice(&rows);
            col_ptr.push(row_idx.len());
        }
        Self::from_parts(n, col_ptr, row_idx)
    }

    /// Dense pattern, mostly useful for small test systems.
    pub fn dense(n: usize) -> Self {
        Self::from_entries(n, (0..n).flat_map(|c| (0..n).map(move |r| (r, c))))
    }

    pub fn diagonal(n: usize) -> Self {
        Self::from_entries(n, std::iter::empty())
    }

    fn from_parts(n: usize, col_ptr: Vec<usize>, row_idx: Vec<usize>) -> Self {
        let diag = (0..n)
            .map(|c| {
                let rows = &row_idx[col_ptr[c]..col_ptr[c + 1]];
                col_ptr[c] + rows.binary_search(&c).expect("diagonal entry present")
            })
            .collect();
        Self { n, col_ptr, row_idx, diag }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    /// Rows stored in column `col`.
    pub fn col_rows(&self, col: usize) -> &[usize] {
        &self.row_idx[self.col_ptr[col]..self.col_ptr[col + 1]]
    }

    /// Position of `(row, col)` in the value array, if structurally present.
    pub fn find(&self, row: usize, col: usize) -> Option<usize> {
        self.col_rows(col)
            .binary_search(&row)
            .ok()
            .map(|k| self.col_ptr[col] + k)
    }

    /// Positions of the diagonal entries in the value array.
    pub fn diagonal_positions(&self) -> &[usize] {
        &self.diag
    }

    fn symbolic(&self) -> SymbolicSparseColMatRef<'_, usize> {
        SymbolicSparseColMatRef::new_checked(self.n, self.n, &self.col_ptr, None, &self.row_idx)
    }
}

/// Sparse matrix whose values live on a shared, immutable pattern.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    pattern: Arc<SparsityPattern>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(pattern: Arc<SparsityPattern>) -> Self {
        let values = vec![0.0; pattern.nnz()];
        Self { pattern, values }
    }

    pub fn identity(pattern: Arc<SparsityPattern>) -> Self {
        let mut m = Self::zeros(pattern);
        m.set_identity();
        m
    }

    /// Builds a matrix from triplets; the pattern is exactly the triplet
    /// positions plus the diagonal. Repeated triplets are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let pattern = Arc::new(SparsityPattern::from_entries(
            n,
            triplets.iter().map(|&(r, c, _)| (r, c)),
        ));
        let mut m = Self::zeros(pattern);
        for &(r, c, v) in triplets {
            m.add(r, c, v);
        }
        m
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn dim(&self) -> usize {
        self.pattern.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn fill_zero(&mut self) {
        self.values.fill(0.0);
    }

    pub fn set_identity(&mut self) {
        self.values.fill(0.0);
        for &p in self.pattern.diagonal_positions() {
            self.values[p] = 1.0;
        }
    }

    /// Entry `(row, col)`; zero when outside the pattern.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pattern.find(row, col).map_or(0.0, |p| self.values[p])
    }

    /// Panics if `(row, col)` is not in the pattern.
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        let p = self
            .pattern
            .find(row, col)
            .unwrap_or_else(|| panic!("({row}, {col}) is not in the sparsity pattern"));
        self.values[p] = value;
    }

    /// Panics if `(row, col)` is not in the pattern.
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        let p = self
            .pattern
            .find(row, col)
            .unwrap_or_else(|| panic!("({row}, {col}) is not in the sparsity pattern"));
        self.values[p] += value;
    }

    /// Overwrites `self` with `I - scale * self`.
    pub fn identity_minus_scaled(&mut self, scale: f64) {
        for v in &mut self.values {
            *v *= -scale;
        }
        for &p in self.pattern.diagonal_positions() {
            self.values[p] += 1.0;
        }
    }

    /// Index of the first non-finite stored value.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_finite())
    }

    /// `out = A x`.
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        out.fill(0.0);
        let p = &self.pattern;
        for (c, &xc) in x.iter().enumerate() {
            if xc == 0.0 {
                continue;
            }
            for k in p.col_ptr[c]..p.col_ptr[c + 1] {
                out[p.row_idx[k]] += self.values[k] * xc;
            }
        }
    }

    /// `out = A V` for a dense column-major `V` with `ncols` columns.
    pub fn mul_dense(&self, v: &[f64], ncols: usize, out: &mut [f64]) {
        let n = self.dim();
        assert_eq!(v.len(), n * ncols);
        assert_eq!(out.len(), n * ncols);
        for j in 0..ncols {
            let (vj, oj) = (&v[j * n..(j + 1) * n], &mut out[j * n..(j + 1) * n]);
            self.mul_vec(vj, oj);
        }
    }

    /// Dense row-major copy, for diagnostics and tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut d = vec![vec![0.0; n]; n];
        let p = &self.pattern;
        for c in 0..n {
            for k in p.col_ptr[c]..p.col_ptr[c + 1] {
                d[p.row_idx[k]][c] = self.values[k];
            }
        }
        d
    }
}

/// Sparse LU with partial pivoting. The symbolic analysis (fill-reducing
/// ordering, elimination structure) is computed once per pattern; each call
/// to [`SparseLu::factor`] only redoes the numeric phase.
pub struct SparseLu {
    pattern: Arc<SparsityPattern>,
    symbolic: SymbolicLu<usize>,
    numeric: NumericLu<usize, f64>,
    factor_mem: MemBuffer,
    solve_mem: MemBuffer,
    factored: bool,
}

impl std::fmt::Debug for SparseLu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseLu")
            .field("dim", &self.pattern.n)
            .field("nnz", &self.pattern.nnz())
            .field("factored", &self.factored)
            .finish()
    }
}

impl SparseLu {
    pub fn new(pattern: Arc<SparsityPattern>) -> Result<Self, LinearSolveError> {
        let symbolic = factorize_symbolic_lu(pattern.symbolic(), Default::default())
            .map_err(|e| LinearSolveError::Backend(format!("{e:?}")))?;
        let factor_mem =
            MemBuffer::new(symbolic.factorize_numeric_lu_scratch::<f64>(Par::Seq, Default::default()));
        let solve_mem = MemBuffer::new(symbolic.solve_in_place_scratch::<f64>(1, Par::Seq));
        Ok(Self {
            pattern,
            symbolic,
            numeric: NumericLu::new(),
            factor_mem,
            solve_mem,
            factored: false,
        })
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    /// Numeric factorization of `a`, which must share this solver's pattern.
    pub fn factor(&mut self, a: &SparseMatrix) -> Result<(), LinearSolveError> {
        if !Arc::ptr_eq(&self.pattern, &a.pattern) && *self.pattern != *a.pattern {
            return Err(LinearSolveError::PatternMismatch);
        }
        if let Some(k) = a.first_non_finite() {
            return Err(LinearSolveError::NonFinite { index: k });
        }
        self.factored = false;
        let mat = SparseColMatRef::new(self.pattern.symbolic(), &a.values);
        self.symbolic
            .factorize_numeric_lu(
                &mut self.numeric,
                mat,
                Par::Seq,
                MemStack::new(&mut self.factor_mem),
                Default::default(),
            )
            .map_err(|e| match e {
                LuError::SymbolicSingular { index } => LinearSolveError::StructurallySingular { index },
                LuError::Generic(e) => LinearSolveError::Backend(format!("{e:?}")),
            })?;
        self.factored = true;
        Ok(())
    }

    /// Solves `A x = b` in place using the last factorization.
    pub fn solve_in_place(&mut self, b: &mut [f64]) -> Result<(), LinearSolveError> {
        if !self.factored {
            return Err(LinearSolveError::NotFactored);
        }
        if b.len() != self.pattern.n {
            return Err(LinearSolveError::DimensionMismatch {
                expected: self.pattern.n,
                found: b.len(),
            });
        }
        let n = b.len();
        let lu = LuRef::new_unchecked(&self.symbolic, &self.numeric);
        let rhs = MatMut::from_column_major_slice_mut(b, n, 1);
        lu.solve_in_place_with_conj(Conj::No, rhs, Par::Seq, MemStack::new(&mut self.solve_mem));
        if let Some(k) = b.iter().position(|v| !v.is_finite()) {
            return Err(LinearSolveError::NumericallySingular { index: k });
        }
        Ok(())
    }
}

/// Solves `A x = b` with a fresh sparse LU factorization.
pub fn solve_full_linear_system(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>, LinearSolveError> {
    let mut lu = SparseLu::new(a.pattern.clone())?;
    lu.factor(a)?;
    let mut x = b.to_vec();
    lu.solve_in_place(&mut x)?;
    Ok(x)
}
