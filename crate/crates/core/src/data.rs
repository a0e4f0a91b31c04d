//! Datasets: CSV ingestion, validation, standardization and synthetic
//! benchmark generation.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{self, DenseMatrix};
use crate::objectives::Family;

/// Columns whose standard deviation falls below this (relative to their
/// magnitude) are treated as constant.
const CONSTANT_COLUMN_TOL: f64 = 1e-12;

/// A dense design matrix with its response vector.
///
/// `column_means` and `column_scales` are the sample mean and standard
/// deviation (denominator `n`) of each stored column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DenseMatrix,
    y: Vec<f64>,
    feature_names: Vec<String>,
    column_means: Vec<f64>,
    column_scales: Vec<f64>,
    standardized: bool,
}

impl Dataset {
    /// Validates shape and finiteness. Feature names default to `x1..xd`.
    pub fn new(x: DenseMatrix, y: Vec<f64>, feature_names: Option<Vec<String>>) -> Result<Self> {
        let (n, d) = (x.nrows(), x.ncols());
        if n < 2 {
            return Err(Error::DegenerateData(format!("need at least 2 observations, got {n}")));
        }
        if d < 1 {
            return Err(Error::DegenerateData("need at least one feature".into()));
        }
        if y.len() != n {
            return Err(Error::Format(format!(
                "response has {} entries but the design has {n} rows",
                y.len()
            )));
        }
        if let Some(pos) = x.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::DegenerateData(format!(
                "non-finite design entry at row {}, column {}",
                pos % n,
                pos / n
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::DegenerateData(format!("non-finite response at row {i}")));
        }
        let feature_names = match feature_names {
            Some(names) if names.len() != d => {
                return Err(Error::Format(format!(
                    "{} feature names for {d} columns",
                    names.len()
                )))
            }
            Some(names) => names,
            None => (1..=d).map(|j| format!("x{j}")).collect(),
        };
        let (column_means, column_scales) = column_stats(&x);
        Ok(Dataset {
            x,
            y,
            feature_names,
            column_means,
            column_scales,
            standardized: false,
        })
    }

    pub fn x(&self) -> &DenseMatrix {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn column_means(&self) -> &[f64] {
        &self.column_means
    }

    pub fn column_scales(&self) -> &[f64] {
        &self.column_scales
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    /// Checks that the response is admissible for `family`.
    pub fn validate_for(&self, family: Family) -> Result<()> {
        match family {
            Family::Binomial => {
                if let Some(i) = self.y.iter().position(|&v| v != 0.0 && v != 1.0) {
                    return Err(Error::DegenerateData(format!(
                        "binomial response must be 0 or 1 (row {i} is {})",
                        self.y[i]
                    )));
                }
            }
            Family::Poisson => {
                if let Some(i) = self.y.iter().position(|&v| v < 0.0 || v.fract() != 0.0) {
                    return Err(Error::DegenerateData(format!(
                        "poisson response must be a nonnegative integer (row {i} is {})",
                        self.y[i]
                    )));
                }
            }
            Family::Gaussian | Family::ScaledGaussian => {}
        }
        Ok(())
    }

    /// Centers every column and scales it to unit variance (denominator `n`).
    ///
    /// Constant columns are dropped and listed in the returned record, which
    /// also maps standardized coefficients back to the original scale.
    pub fn standardize(&self) -> (Dataset, StandardizationRecord) {
        let n = self.n();
        let mut retained = Vec::new();
        let mut dropped = Vec::new();
        for j in 0..self.d() {
            let (m, s) = (self.column_means[j], self.column_scales[j]);
            if s <= CONSTANT_COLUMN_TOL * (1.0 + m.abs()) {
                dropped.push(j);
            } else {
                retained.push(j);
            }
        }
        if !dropped.is_empty() {
            let names: Vec<&str> = dropped.iter().map(|&j| self.feature_names[j].as_str()).collect();
            log::warn!("dropping {} constant column(s): {}", dropped.len(), names.join(", "));
        }

        let mut columns = Vec::with_capacity(retained.len());
        for &j in &retained {
            let (m, s) = (self.column_means[j], self.column_scales[j]);
            columns.push(self.x.col(j).iter().map(|&v| (v - m) / s).collect::<Vec<_>>());
        }
        let x = DenseMatrix::from_columns(n, columns).expect("retained columns have n rows");
        let (column_means, column_scales) = column_stats(&x);
        let std = Dataset {
            x,
            y: self.y.clone(),
            feature_names: retained.iter().map(|&j| self.feature_names[j].clone()).collect(),
            column_means,
            column_scales,
            standardized: true,
        };
        let record = StandardizationRecord {
            means: retained.iter().map(|&j| self.column_means[j]).collect(),
            scales: retained.iter().map(|&j| self.column_scales[j]).collect(),
            retained,
            dropped,
            original_features: self.d(),
        };
        (std, record)
    }

    /// Writes the dataset as CSV with the response in the first column.
    pub fn write_csv<W: Write>(&self, writer: W, header: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let csv_err = |e: csv::Error| Error::Format(e.to_string());
        if header {
            let mut row = vec!["y".to_string()];
            row.extend(self.feature_names.iter().cloned());
            w.write_record(&row).map_err(csv_err)?;
        }
        for i in 0..self.n() {
            let mut row = Vec::with_capacity(self.d() + 1);
            row.push(format_f64(self.y[i]));
            row.extend((0..self.d()).map(|j| format_f64(self.x.get(i, j))));
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest representation that parses back to the same `f64`.
pub(crate) fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

fn column_stats(x: &DenseMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = x.nrows() as f64;
    (0..x.ncols())
        .map(|j| {
            let col = x.col(j);
            let m = matrix::mean(col);
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            (m, var.sqrt())
        })
        .unzip()
}

/// What [`Dataset::standardize`] did, sufficient to undo it on coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationRecord {
    /// Original means of the retained columns.
    pub means: Vec<f64>,
    /// Original standard deviations of the retained columns.
    pub scales: Vec<f64>,
    /// Original indices of the retained columns, in order.
    pub retained: Vec<usize>,
    /// Original indices of dropped constant columns.
    pub dropped: Vec<usize>,
    pub original_features: usize,
}

impl StandardizationRecord {
    /// Maps standardized coefficients to the original scale.
    ///
    /// Returns a dense vector over all original features (dropped columns get
    /// zero) and the adjusted intercept.
    pub fn unstandardize(&self, beta_std: &[f64], intercept_std: f64) -> (Vec<f64>, f64) {
        let mut beta = vec![0.0; self.original_features];
        let mut intercept = intercept_std;
        for (k, &b) in beta_std.iter().enumerate() {
            if b != 0.0 {
                let orig = b / self.scales[k];
                beta[self.retained[k]] = orig;
                intercept -= orig * self.means[k];
            }
        }
        (beta, intercept)
    }

    /// Inverse of [`StandardizationRecord::unstandardize`] on coefficients.
    pub fn standardize_coefficients(&self, beta: &[f64], intercept: f64) -> (Vec<f64>, f64) {
        let mut beta_std = vec![0.0; self.retained.len()];
        let mut intercept_std = intercept;
        for (k, &j) in self.retained.iter().enumerate() {
            beta_std[k] = beta[j] * self.scales[k];
            intercept_std += beta[j] * self.means[k];
        }
        (beta_std, intercept_std)
    }
}

/// Which CSV column holds the response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResponseColumn {
    Index(usize),
    Name(String),
}

impl std::str::FromStr for ResponseColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ResponseColumn::Index(i),
            Err(_) => ResponseColumn::Name(s.to_string()),
        })
    }
}

/// Reads a comma-separated numeric table. See [`read_csv`].
pub fn load_csv(path: impl AsRef<Path>, has_header: bool, response: &ResponseColumn) -> Result<Dataset> {
    let file = std::fs::File::open(path.as_ref())?;
    read_csv(file, has_header, response)
}

/// Parses a CSV table; the response column is removed and the remaining
/// columns become features in file order. Rows and columns in error messages
/// are 1-based file positions.
pub fn read_csv<R: Read>(reader: R, has_header: bool, response: &ResponseColumn) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut header: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, record) in rdr.records().enumerate() {
        let line = idx + 1;
        let record = record.map_err(|e| Error::Format(format!("line {line}: {e}")))?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::Format(format!(
                    "ragged row at line {line}: {} fields, expected {w}",
                    record.len()
                )))
            }
            _ => {}
        }
        if has_header && header.is_none() {
            header = Some(record.iter().map(str::to_string).collect());
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(c, field)| {
                field.parse::<f64>().map_err(|_| Error::Parse {
                    row: line,
                    column: c + 1,
                    message: format!("'{field}' is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }

    let width = width.ok_or_else(|| Error::Format("empty file".into()))?;
    if width < 2 {
        return Err(Error::Format(format!("need at least 2 columns, found {width}")));
    }
    let response_idx = match response {
        ResponseColumn::Index(i) if *i < width => *i,
        ResponseColumn::Index(i) => {
            return Err(Error::param(format!("response column {i} out of range (width {width})")))
        }
        ResponseColumn::Name(name) => header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| Error::param(format!("response column '{name}' not found in header")))?,
    };

    let n = rows.len();
    let y: Vec<f64> = rows.iter().map(|r| r[response_idx]).collect();
    let features: Vec<usize> = (0..width).filter(|&c| c != response_idx).collect();
    let columns: Vec<Vec<f64>> = features
        .iter()
        .map(|&c| rows.iter().map(|r| r[c]).collect())
        .collect();
    let names = header.map(|h| features.iter().map(|&c| h[c].clone()).collect());
    let x = DenseMatrix::from_columns(n, columns)?;
    Dataset::new(x, y, names)
}

/// Parameters of the AR(1) synthetic design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub sparsity: usize,
    pub rho: f64,
    pub family: Family,
    pub noise_sd: f64,
    pub seed: u64,
}

/// Poisson means are capped just below this.
const POISSON_MEAN_CAP: f64 = 50.0;

/// Draws a dataset with `corr(x_j, x_k) = rho^|j−k|` rows and a random
/// `sparsity`-sparse coefficient vector with entries `±U[0.5, 1.5]`.
///
/// Returns the dataset and the true coefficients.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(Dataset, Vec<f64>)> {
    let SyntheticSpec {
        n,
        d,
        sparsity,
        rho,
        family,
        noise_sd,
        seed,
    } = *spec;
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::param(format!("rho must lie in [0, 1), got {rho}")));
    }
    if sparsity > d {
        return Err(Error::param(format!("sparsity {sparsity} exceeds dimension {d}")));
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(Error::param(format!("noise_sd must be finite and >= 0, got {noise_sd}")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let innovation = (1.0 - rho * rho).sqrt();
    let mut x = DenseMatrix::zeros(n, d);
    for i in 0..n {
        let mut prev = 0.0;
        for j in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            let v = if j == 0 { z } else { rho * prev + innovation * z };
            x.set(i, j, v);
            prev = v;
        }
    }

    let mut beta = vec![0.0; d];
    let mut support: Vec<usize> = sample(&mut rng, d, sparsity).into_vec();
    support.sort_unstable();
    for j in support {
        let magnitude = rng.random_range(0.5..1.5);
        beta[j] = if rng.random_bool(0.5) { magnitude } else { -magnitude };
    }

    let eta = x.matvec(&beta);
    let y: Vec<f64> = match family {
        Family::Gaussian | Family::ScaledGaussian => eta
            .iter()
            .map(|&e| {
                let z: f64 = rng.sample(StandardNormal);
                e + noise_sd * z
            })
            .collect(),
        Family::Binomial => eta
            .iter()
            .map(|&e| {
                let p = 1.0 / (1.0 + (-e).exp());
                let b = Bernoulli::new(p).expect("probability in [0, 1]");
                if b.sample(&mut rng) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect(),
        Family::Poisson => {
            let cap = (POISSON_MEAN_CAP * (1.0 - 1e-9)).ln();
            eta.iter()
                .map(|&e| {
                    let mu = e.min(cap).exp();
                    Poisson::new(mu).expect("positive finite mean").sample(&mut rng)
                })
                .collect()
        }
    };
    Ok((Dataset::new(x, y, None)?, beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth(rho: f64, family: Family, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            n: 60,
            d: 8,
            sparsity: 3,
            rho,
            family,
            noise_sd: 1.0,
            seed,
        }
    }

    #[test]
    fn reads_simple_table() {
        let ds = read_csv("1,2,3\n4,5,6\n7,8,9\n".as_bytes(), false, &ResponseColumn::Index(0)).unwrap();
        assert_eq!(ds.y(), &[1.0, 4.0, 7.0]);
        assert_eq!(ds.x().row(0), vec![2.0, 3.0]);
        assert_eq!(ds.x().row(2), vec![8.0, 9.0]);
        assert_eq!(ds.feature_names(), &["x1", "x2"]);
    }

    #[test]
    fn header_and_named_response() {
        let text = "a,resp,b\n1,2,3\n4,5,6\n";
        let ds = read_csv(text.as_bytes(), true, &ResponseColumn::Name("resp".into())).unwrap();
        assert_eq!(ds.y(), &[2.0, 5.0]);
        assert_eq!(ds.feature_names(), &["a", "b"]);
        assert_eq!(ds.n(), 2);
    }

    #[test]
    fn parse_error_has_location() {
        let err = read_csv("1,2\n3,oops\n".as_bytes(), false, &ResponseColumn::Index(0)).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => assert_eq!((row, column), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_rows_are_format_errors() {
        let err = read_csv("1,2,3\n4,5\n".as_bytes(), false, &ResponseColumn::Index(0)).unwrap_err();
        assert!(matches!(err, Error::Format(_)), "{err:?}");
    }

    #[test]
    fn single_column_rejected() {
        assert!(read_csv("1\n2\n".as_bytes(), false, &ResponseColumn::Index(0)).is_err());
    }

    #[test]
    fn constant_column_dropped() {
        let x = DenseMatrix::from_rows(&[[1.0, 1.0, 0.0], [1.0, 2.0, 1.0], [1.0, 4.0, 5.0]]).unwrap();
        let ds = Dataset::new(x, vec![1.0, 2.0, 3.0], None).unwrap();
        let (std, rec) = ds.standardize();
        assert_eq!(rec.dropped, vec![0]);
        assert_eq!(rec.retained, vec![1, 2]);
        assert_eq!(std.d(), 2);
        assert_eq!(std.feature_names(), &["x2", "x3"]);
    }

    #[test]
    fn standardized_columns_have_unit_variance() {
        let (ds, _) = generate_synthetic(&synth(0.5, Family::Gaussian, 3)).unwrap();
        let (std, _) = ds.standardize();
        assert!(std.is_standardized());
        for j in 0..std.d() {
            assert!(std.column_means()[j].abs() < 1e-10);
            assert!((std.column_scales()[j] - 1.0).abs() < 1e-8);
        }
        let (again, _) = std.standardize();
        for (a, b) in again.x().as_slice().iter().zip(std.x().as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn unstandardize_round_trip_predictions() {
        let (ds, _) = generate_synthetic(&synth(0.3, Family::Gaussian, 9)).unwrap();
        let (std, rec) = ds.standardize();
        let beta_std: Vec<f64> = (0..std.d()).map(|j| (j as f64 - 3.0) * 0.37).collect();
        let b_std = 0.8;
        let (beta, b) = rec.unstandardize(&beta_std, b_std);
        let pred_std = std.x().matvec(&beta_std);
        let pred = ds.x().matvec(&beta);
        for i in 0..ds.n() {
            assert!((pred_std[i] + b_std - pred[i] - b).abs() < 1e-10);
        }
        let (back, b_back) = rec.standardize_coefficients(&beta, b);
        assert!((b_back - b_std).abs() < 1e-10);
        for (x, y) in back.iter().zip(&beta_std) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let a = generate_synthetic(&synth(0.5, Family::Binomial, 42)).unwrap();
        let b = generate_synthetic(&synth(0.5, Family::Binomial, 42)).unwrap();
        assert_eq!(a, b);
        assert!(a.0.y().iter().all(|&v| v == 0.0 || v == 1.0));
        assert_eq!(a.1.iter().filter(|b| **b != 0.0).count(), 3);
        a.0.validate_for(Family::Binomial).unwrap();
    }

    #[test]
    fn generator_rejects_bad_parameters() {
        let mut s = synth(1.0, Family::Gaussian, 0);
        assert!(generate_synthetic(&s).is_err());
        s.rho = 0.5;
        s.sparsity = 9;
        assert!(generate_synthetic(&s).is_err());
    }

    #[test]
    fn poisson_response_is_valid() {
        let (ds, _) = generate_synthetic(&synth(0.5, Family::Poisson, 1)).unwrap();
        ds.validate_for(Family::Poisson).unwrap();
        assert!(ds.y().iter().all(|&v| v < 200.0));
    }

    #[test]
    fn response_validation() {
        let x = DenseMatrix::from_rows(&[[1.0], [2.0], [3.0]]).unwrap();
        let ds = Dataset::new(x, vec![0.0, 1.0, 2.0], None).unwrap();
        assert!(ds.validate_for(Family::Binomial).is_err());
        ds.validate_for(Family::Poisson).unwrap();
        let x = DenseMatrix::from_rows(&[[1.0], [2.0]]).unwrap();
        let ds = Dataset::new(x, vec![0.5, 1.0], None).unwrap();
        assert!(ds.validate_for(Family::Poisson).is_err());
    }

    #[test]
    fn csv_round_trip_exact() {
        let (ds, _) = generate_synthetic(&synth(0.5, Family::Gaussian, 5)).unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf, true).unwrap();
        let back = read_csv(buf.as_slice(), true, &ResponseColumn::Index(0)).unwrap();
        assert_eq!(back.y(), ds.y());
        assert_eq!(back.x(), ds.x());
    }
}
