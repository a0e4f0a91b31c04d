use serde::{Deserialize, Serialize};

use crate::data::StandardizationRecord;
use crate::matrix::DenseMatrix;

/// Column-compressed storage of a coefficient path: column `k` holds the
/// nonzero coefficients at the `k`-th penalty level.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparsePath {
    nrows: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparsePath {
    pub fn new(nrows: usize) -> Self {
        SparsePath {
            nrows,
            col_ptr: vec![0],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Appends a column, storing only its nonzero entries.
    pub fn push_dense(&mut self, column: &[f64]) {
        assert_eq!(column.len(), self.nrows);
        for (j, &v) in column.iter().enumerate() {
            if v != 0.0 {
                self.row_idx.push(j);
                self.values.push(v);
            }
        }
        self.col_ptr.push(self.row_idx.len());
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.col_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(feature, value)` pairs of column `k`, by increasing feature index.
    pub fn column(&self, k: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_ptr[k]..self.col_ptr[k + 1];
        self.row_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn column_nnz(&self, k: usize) -> usize {
        self.col_ptr[k + 1] - self.col_ptr[k]
    }

    pub fn dense_column(&self, k: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows];
        for (j, v) in self.column(k) {
            out[j] = v;
        }
        out
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        let range = self.col_ptr[k]..self.col_ptr[k + 1];
        match self.row_idx[range.clone()].binary_search(&j) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }
}

/// Per-penalty-level solver diagnostics.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LambdaDiagnostics {
    /// Maximum violation of the first-order conditions (standardized scale).
    pub kkt_residual: f64,
    /// Coordinate sweeps, summed over all inner solves.
    pub inner_sweeps: usize,
    /// Inner solves performed by the active-set loop.
    pub middle_rounds: usize,
    /// Times the active or strong set grew.
    pub set_growths: usize,
    pub newton_steps: usize,
    /// Full-gradient KKT scans over all coordinates.
    pub kkt_scans: usize,
    /// Curvature-weighted coordinate change of the final sweep.
    pub max_coordinate_change: f64,
    /// Penalized objective on the standardized problem.
    pub objective: f64,
    /// Objective decrease achieved by the final inner solve.
    pub objective_change: f64,
    pub active_size: usize,
    pub strong_size: usize,
    /// σ alternations (scaled family only).
    pub sigma_iterations: usize,
    pub converged: bool,
}

impl LambdaDiagnostics {
    pub(crate) fn absorb(&mut self, other: &LambdaDiagnostics) {
        self.inner_sweeps += other.inner_sweeps;
        self.middle_rounds += other.middle_rounds;
        self.set_growths += other.set_growths;
        self.newton_steps += other.newton_steps;
        self.kkt_scans += other.kkt_scans;
    }
}

/// A fitted regularization path on the original data scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathFit {
    /// Penalty levels, decreasing.
    pub lambdas: Vec<f64>,
    /// `d × K` coefficients over the original features.
    pub beta_path: SparsePath,
    pub intercepts: Vec<f64>,
    /// Estimated noise levels (scaled family only).
    pub sigmas: Option<Vec<f64>>,
    pub diagnostics: Vec<LambdaDiagnostics>,
    pub standardization: StandardizationRecord,
    pub feature_names: Vec<String>,
    /// Set when the path was cut short, e.g. by an interpolating fit.
    pub stopped_early: Option<String>,
}

impl PathFit {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn coefficients(&self, k: usize) -> Vec<f64> {
        self.beta_path.dense_column(k)
    }

    /// Coefficients and intercept on the internal standardized scale.
    pub fn standardized_coefficients(&self, k: usize) -> (Vec<f64>, f64) {
        self.standardization
            .standardize_coefficients(&self.coefficients(k), self.intercepts[k])
    }

    /// Linear predictor `b_k + X β_k` for new rows on the original scale.
    pub fn predict_linear(&self, x: &DenseMatrix, k: usize) -> Vec<f64> {
        let mut eta = vec![self.intercepts[k]; x.nrows()];
        for (j, v) in self.beta_path.column(k) {
            crate::matrix::axpy(v, x.col(j), &mut eta);
        }
        eta
    }

    pub fn kkt_residuals(&self) -> Vec<f64> {
        self.diagnostics.iter().map(|d| d.kkt_residual).collect()
    }

    pub fn inner_sweep_counts(&self) -> Vec<usize> {
        self.diagnostics.iter().map(|d| d.inner_sweeps).collect()
    }

    pub fn middle_round_counts(&self) -> Vec<usize> {
        self.diagnostics.iter().map(|d| d.middle_rounds).collect()
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.diagnostics.iter().map(|d| d.objective).collect()
    }

    /// Indices of path points whose solve hit an iteration cap or a rejected
    /// Newton step.
    pub fn nonconverged(&self) -> Vec<usize> {
        self.diagnostics
            .iter()
            .enumerate()
            .filter(|(_, d)| !d.converged)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn total_kkt_scans(&self) -> usize {
        self.diagnostics.iter().map(|d| d.kkt_scans).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_path_stores_only_nonzeros() {
        let mut p = SparsePath::new(4);
        p.push_dense(&[0.0, 0.0, 0.0, 0.0]);
        p.push_dense(&[0.0, 1.5, 0.0, -2.0]);
        assert_eq!(p.ncols(), 2);
        assert_eq!(p.nnz(), 2);
        assert_eq!(p.column_nnz(0), 0);
        assert_eq!(p.column(1).collect::<Vec<_>>(), vec![(1, 1.5), (3, -2.0)]);
        assert_eq!(p.get(3, 1), -2.0);
        assert_eq!(p.get(2, 1), 0.0);
        assert_eq!(p.dense_column(1), vec![0.0, 1.5, 0.0, -2.0]);
    }
}
