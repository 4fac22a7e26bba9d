//! Sparse non-negative document-term matrix.
//!
//! Stored in compressed-row form with a compressed-column mirror so that the
//! W sweep (rows) and the H sweep (columns) can both gather without scatter.

use std::fmt::Write as _;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Sparse M×N non-negative matrix `V` (documents × terms).
#[derive(Debug, Clone, PartialEq)]
pub struct DocTermMatrix {
    n_docs: usize,
    n_terms: usize,
    // CSR
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    row_vals: Vec<f64>,
    // CSC mirror
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    col_vals: Vec<f64>,
}

impl DocTermMatrix {
    /// Builds the matrix from per-row `(column, value)` lists.
    ///
    /// Zero values are dropped; columns within a row must be unique.
    pub fn from_rows(n_terms: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n_docs = rows.len();
        let mut row_ptr = Vec::with_capacity(n_docs + 1);
        let mut col_idx = Vec::new();
        let mut row_vals = Vec::new();
        row_ptr.push(0);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::InvalidParameter(format!(
                        "duplicate column {} in row {i}",
                        w[0].0
                    )));
                }
            }
            for (j, v) in row {
                if j >= n_terms {
                    return Err(Error::DimensionMismatch(format!(
                        "column {j} out of range for {n_terms} terms"
                    )));
                }
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::NegativeEntry {
                        matrix: "V",
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                if v > 0.0 {
                    col_idx.push(j);
                    row_vals.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }

        let nnz = col_idx.len();
        let mut col_counts = vec![0usize; n_terms + 1];
        for &j in &col_idx {
            col_counts[j + 1] += 1;
        }
        for j in 0..n_terms {
            col_counts[j + 1] += col_counts[j];
        }
        let col_ptr = col_counts.clone();
        let mut next = col_counts;
        let mut row_idx = vec![0usize; nnz];
        let mut col_vals = vec![0.0; nnz];
        for i in 0..n_docs {
            for p in row_ptr[i]..row_ptr[i + 1] {
                let j = col_idx[p];
                let q = next[j];
                row_idx[q] = i;
                col_vals[q] = row_vals[p];
                next[j] += 1;
            }
        }

        Ok(Self {
            n_docs,
            n_terms,
            row_ptr,
            col_idx,
            row_vals,
            col_ptr,
            row_idx,
            col_vals,
        })
    }

    pub fn from_dense(dense: &Array2<f64>) -> Result<Self> {
        let rows = dense
            .rows()
            .into_iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(j, &v)| (j, v))
                    .collect()
            })
            .collect();
        Self::from_rows(dense.ncols(), rows)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.n_docs, self.n_terms));
        for (i, j, v) in self.triplets() {
            out[[i, j]] = v;
        }
        out
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Non-zeros of row `i` as parallel `(columns, values)` slices.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.row_vals[r])
    }

    /// Non-zeros of column `j` as parallel `(rows, values)` slices.
    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[r.clone()], &self.col_vals[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    /// Row-major `(row, col, value)` iteration over stored entries.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_docs).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    /// Indices of rows with no stored entries.
    pub fn empty_rows(&self) -> Vec<usize> {
        (0..self.n_docs)
            .filter(|&i| self.row_ptr[i] == self.row_ptr[i + 1])
            .collect()
    }

    /// Coordinate-format text: `M N NNZ` header, then `i j value` lines, 0-indexed.
    pub fn to_coordinate_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.n_docs, self.n_terms, self.nnz());
        for (i, j, v) in self.triplets() {
            let _ = writeln!(out, "{i} {j} {v}");
        }
        out
    }

    pub fn from_coordinate_text(text: &str) -> Result<Self> {
        let bad = |m: String| Error::InvalidParameter(format!("coordinate matrix: {m}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("missing header".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad(format!("bad header '{header}'"))))
            .collect::<Result<_>>()?;
        let [m, n, nnz] = dims[..] else {
            return Err(bad(format!("bad header '{header}'")));
        };
        let mut rows = vec![Vec::new(); m];
        let mut seen = 0;
        for line in lines {
            let mut it = line.split_whitespace();
            let (Some(i), Some(j), Some(v), None) = (it.next(), it.next(), it.next(), it.next())
            else {
                return Err(bad(format!("bad entry '{line}'")));
            };
            let i: usize = i.parse().map_err(|_| bad(format!("bad row in '{line}'")))?;
            let j: usize = j.parse().map_err(|_| bad(format!("bad column in '{line}'")))?;
            let v: f64 = v.parse().map_err(|_| bad(format!("bad value in '{line}'")))?;
            if i >= m {
                return Err(bad(format!("row {i} out of range")));
            }
            rows[i].push((j, v));
            seen += 1;
        }
        if seen != nnz {
            return Err(bad(format!("header declares {nnz} entries, found {seen}")));
        }
        Self::from_rows(n, rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn csr_and_csc_agree() {
        let d = array![[1.0, 0.0, 2.0], [0.0, 0.0, 0.0], [3.0, 4.0, 0.0]];
        let v = DocTermMatrix::from_dense(&d).unwrap();
        assert_eq!(v.nnz(), 4);
        assert_eq!(v.to_dense(), d);
        assert_eq!(v.col(0), (&[0usize, 2][..], &[1.0, 3.0][..]));
        assert_eq!(v.col(2), (&[0usize][..], &[2.0][..]));
        assert_eq!(v.empty_rows(), vec![1]);
        assert_eq!(v.get(2, 1), 4.0);
        assert_eq!(v.get(1, 1), 0.0);
    }

    #[test]
    fn rejects_negative_and_out_of_range() {
        assert!(matches!(
            DocTermMatrix::from_rows(2, vec![vec![(0, -1.0)]]),
            Err(Error::NegativeEntry { .. })
        ));
        assert!(DocTermMatrix::from_rows(2, vec![vec![(2, 1.0)]]).is_err());
        assert!(DocTermMatrix::from_rows(2, vec![vec![(1, 1.0), (1, 2.0)]]).is_err());
    }

    #[test]
    fn coordinate_text_round_trip() {
        let d = array![[0.5, 0.0], [0.0, 0.25], [0.0, 0.0]];
        let v = DocTermMatrix::from_dense(&d).unwrap();
        let text = v.to_coordinate_text();
        assert!(text.starts_with("3 2 2\n0 0 0.5\n1 1 0.25\n"));
        assert_eq!(DocTermMatrix::from_coordinate_text(&text).unwrap(), v);
    }
}
