//! Compressed sparse row storage for superoperators.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::C64;

/// Complex CSR matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

/// Accumulates `(row, col, value)` entries; duplicates are summed.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, entries: Vec::new() }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self { nrows, ncols, entries: Vec::with_capacity(cap) }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: C64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        if value.re != 0.0 || value.im != 0.0 {
            self.entries.push((row, col, value));
        }
    }

    pub fn build(mut self) -> CsrMatrix {
        self.entries.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = alloc::vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values = Vec::with_capacity(self.entries.len());
        let entries = &self.entries;
        let mut i = 0;
        while i < entries.len() {
            let (r, c, mut v) = entries[i];
            i += 1;
            while i < entries.len() && entries[i].0 == r && entries[i].1 == c {
                v += entries[i].2;
                i += 1;
            }
            if v.re != 0.0 || v.im != 0.0 {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
            }
        }
        for r in 0..self.nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix { nrows: self.nrows, ncols: self.ncols, row_ptr, col_idx, values }
    }
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        TripletBuilder::new(nrows, ncols).build()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.col_idx[k], self.values[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let cols = &self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]];
        match cols.binary_search(&c) {
            Ok(k) => self.values[self.row_ptr[r] + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `out = self · x`.
    pub fn mul_vec_into(&self, x: &[C64], out: &mut [C64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(out.len(), self.nrows);
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *o = acc;
        }
    }

    /// `out += alpha · self · x`.
    pub fn mul_vec_acc(&self, alpha: C64, x: &[C64], out: &mut [C64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *o += alpha * acc;
        }
    }

    pub fn mul_vec(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch { expected: self.ncols, found: x.len() });
        }
        let mut out = alloc::vec![C64::new(0.0, 0.0); self.nrows];
        self.mul_vec_into(x, &mut out);
        Ok(out)
    }

    /// `Σ_k coeffs[k] · mats[k]`, all with the same shape.
    pub fn linear_combination(mats: &[&CsrMatrix], coeffs: &[C64]) -> Result<Self> {
        let first = mats.first().ok_or(Error::DimensionMismatch { expected: 1, found: 0 })?;
        let mut b = TripletBuilder::new(first.nrows, first.ncols);
        for (m, &c) in mats.iter().zip(coeffs) {
            if m.nrows != first.nrows || m.ncols != first.ncols {
                return Err(Error::DimensionMismatch { expected: first.nrows, found: m.nrows });
            }
            for (r, col, v) in m.iter() {
                b.push(r, col, c * v);
            }
        }
        Ok(b.build())
    }

    /// Dense row-major copy; only sensible for small matrices.
    pub fn to_dense(&self) -> Vec<C64> {
        let mut d = alloc::vec![C64::new(0.0, 0.0); self.nrows * self.ncols];
        for (r, c, v) in self.iter() {
            d[r * self.ncols + c] = v;
        }
        d
    }

    pub(crate) fn to_faer_csc(
        &self,
        row_override: Option<(usize, &[(usize, C64)])>,
    ) -> Result<faer::sparse::SparseColMat<usize, C64>> {
        use faer::sparse::{SparseColMat, Triplet};
        let mut triplets = Vec::with_capacity(self.nnz() + self.nrows);
        for (r, c, v) in self.iter() {
            if matches!(row_override, Some((or, _)) if or == r) {
                continue;
            }
            triplets.push(Triplet::new(r, c, v));
        }
        if let Some((r, entries)) = row_override {
            for &(c, v) in entries {
                triplets.push(Triplet::new(r, c, v));
            }
        }
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &triplets)
            .map_err(|e| Error::LinearSolve(alloc::format!("{e:?}")))
    }
}
