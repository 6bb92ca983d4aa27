//! Small dense linear systems (k ≤ 16) solved by Gaussian elimination with
//! row pivoting. Used for the per-half-node flux systems and the per-node
//! deviator systems, which are at most a handful of unknowns.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 16;

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds from nested rows; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("matrix", format!("expected {dim} columns in every row")));
        }
        Ok(Self { dim, data: rows.iter().flatten().copied().collect() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "dimension mismatch");
        (0..self.dim).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Infinity norm of `A·x − b`.
pub fn residual_inf(a: &Matrix, x: &[f64], b: &[f64]) -> f64 {
    a.mul_vec(x).iter().zip(b).fold(0.0_f64, |acc, (ax, bi)| acc.max((ax - bi).abs()))
}

/// Solves `A·x = b` by elimination with partial (row) pivoting.
///
/// A pivot whose magnitude falls below `singular_tol · max|A|` is reported as
/// [`Error::Singular`] carrying the elimination column.
pub fn solve_dense(a: &Matrix, b: &[f64], singular_tol: f64) -> Result<Vec<f64>> {
    let k = a.dim();
    if b.len() != k {
        return Err(Error::invalid("b", format!("length {} does not match dimension {k}", b.len())));
    }
    if k == 0 || k > MAX_DIM {
        return Err(Error::invalid("A", format!("dimension {k} outside 1..={MAX_DIM}")));
    }

    let threshold = singular_tol * a.max_abs();
    let mut m = a.clone();
    let mut x = b.to_vec();

    for col in 0..k {
        let (pivot_row, pivot_abs) =
            (col..k)
                .map(|r| (r, m[(r, col)].abs()))
                .fold((col, -1.0), |best, cand| if cand.1 > best.1 { cand } else { best });
        if pivot_abs <= threshold || pivot_abs == 0.0 {
            return Err(Error::Singular { pivot: col });
        }
        if pivot_row != col {
            for j in 0..k {
                m.data.swap(col * k + j, pivot_row * k + j);
            }
            x.swap(col, pivot_row);
        }
        let pivot = m[(col, col)];
        for r in col + 1..k {
            let factor = m[(r, col)] / pivot;
            if factor == 0.0 {
                continue;
            }
            m[(r, col)] = 0.0;
            for j in col + 1..k {
                m[(r, j)] -= factor * m[(col, j)];
            }
            x[r] -= factor * x[col];
        }
    }

    for r in (0..k).rev() {
        let tail: f64 = (r + 1..k).map(|j| m[(r, j)] * x[j]).sum();
        x[r] = (x[r] - tail) / m[(r, r)];
    }
    Ok(x)
}
