//! Row-major dense matrix with the handful of kernels the pipeline needs:
//! multiply, self-Gram (A * A^T), row normalization and TSV export.
//!
//! Parallelism is over output rows only and every row is accumulated in a
//! fixed order, so results are bit-identical for any thread count.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::vocab::Vocabulary;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Build from row-major data, rejecting NaN and infinities.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        assert_eq!(rows * cols, data.len(), "shape does not match data length");
        for (k, &v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteEntry {
                    row: k / cols,
                    col: k % cols,
                    value: v,
                });
            }
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in &rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self::from_vec(r, c, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `self * other`. Zero entries on the left are skipped, which makes
    /// products with a sparse left factor cheap without changing semantics
    /// (skipping an exact 0.0 term never alters the accumulated sum).
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let n = other.cols;
        let mut out = DenseMatrix::zeros(self.rows, n);
        out.data
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(i, out_row)| {
                let a_row = &self.data[i * self.cols..(i + 1) * self.cols];
                for (k, &a) in a_row.iter().enumerate() {
                    if a != 0.0 {
                        let b_row = &other.data[k * n..(k + 1) * n];
                        for (o, &b) in out_row.iter_mut().zip(b_row) {
                            *o += a * b;
                        }
                    }
                }
            });
        out
    }

    /// `self * self^T`, exploiting symmetry: each upper-triangle entry is one
    /// sequential dot product, then mirrored, so the result is exactly
    /// symmetric.
    pub fn gram(&self) -> DenseMatrix {
        let n = self.rows;
        let mut out = DenseMatrix::zeros(n, n);
        out.data
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(i, out_row)| {
                let a = self.row(i);
                for j in i..n {
                    out_row[j] = dot(a, self.row(j));
                }
            });
        for i in 0..n {
            for j in 0..i {
                out.data[i * n + j] = out.data[j * n + i];
            }
        }
        out
    }

    /// L2-normalize every row in place; all-zero rows are left untouched.
    pub fn normalize_rows_l2(&mut self) {
        let cols = self.cols;
        self.data.par_chunks_mut(cols).for_each(|row| {
            let norm = dot(row, row).sqrt();
            if norm > 0.0 {
                for v in row.iter_mut() {
                    *v /= norm;
                }
            }
        });
    }

    pub fn add_assign(&mut self, other: &DenseMatrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Fraction of entries whose absolute difference exceeds `tol`.
    pub fn diff_fraction(&self, other: &DenseMatrix, tol: f64) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let differing = self
            .data
            .iter()
            .zip(&other.data)
            .filter(|(a, b)| (*a - *b).abs() > tol)
            .count();
        differing as f64 / self.data.len() as f64
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// TSV export: a header row of tokens, then one labeled row per token.
    pub fn write_tsv<W: Write>(&self, vocab: &Vocabulary, mut w: W) -> std::io::Result<()> {
        assert_eq!(self.rows, vocab.len());
        assert_eq!(self.cols, vocab.len());
        write!(w, "token")?;
        for (_, token) in vocab.iter() {
            write!(w, "\t{token}")?;
        }
        writeln!(w)?;
        for (i, token) in vocab.iter() {
            write!(w, "{token}")?;
            for &v in self.row(i as usize) {
                write!(w, "\t{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn save_tsv(&self, vocab: &Vocabulary, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_tsv(vocab, &mut w).map_err(|e| Error::io(path, e))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four independent accumulators so the loop vectorizes; order is fixed
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        let i = k * 4;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in chunks * 4..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}
