//! On-disk formats shared by `fit` and `plot`.
//!
//! A fit produces a long-format path table with one row per nonzero
//! coefficient,
//!
//! ```text
//! lambda_index,lambda,feature,coefficient
//! 2,0.8123,x7,0.031
//! ```
//!
//! with 1-based `lambda_index`, and a JSON sidecar holding everything else.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use pathwise::{LambdaDiagnostics, PathFit};

use crate::error::CliError;

pub const PATH_HEADER: [&str; 4] = ["lambda_index", "lambda", "feature", "coefficient"];

/// Shortest text that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn sidecar_path(output: &Path) -> PathBuf {
    output.with_extension("json")
}

/// Settings echoed into the sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub method: String,
    pub family: String,
    pub type_gaussian: Option<String>,
    pub gamma: Option<f64>,
    pub nlambda: usize,
    pub lambda_min_ratio: f64,
    pub prec: f64,
    pub max_inner_sweeps: usize,
    pub max_middle_rounds: usize,
    pub max_newton_steps: usize,
    pub response: String,
    pub header: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub version: String,
    pub config: ConfigEcho,
    pub n: usize,
    pub d: usize,
    pub feature_names: Vec<String>,
    pub dropped_features: Vec<String>,
    pub lambdas: Vec<f64>,
    pub intercepts: Vec<f64>,
    pub sigmas: Option<Vec<f64>>,
    pub kkt_residuals: Vec<f64>,
    pub inner_sweeps: Vec<usize>,
    pub middle_rounds: Vec<usize>,
    pub nonconverged: Vec<usize>,
    pub stopped_early: Option<String>,
    pub diagnostics: Vec<LambdaDiagnostics>,
}

impl Sidecar {
    pub fn new(fit: &PathFit, config: ConfigEcho, n: usize) -> Self {
        Sidecar {
            version: pathwise::VERSION.to_string(),
            config,
            n,
            d: fit.feature_names.len(),
            feature_names: fit.feature_names.clone(),
            dropped_features: fit
                .standardization
                .dropped
                .iter()
                .map(|&j| fit.feature_names[j].clone())
                .collect(),
            lambdas: fit.lambdas.clone(),
            intercepts: fit.intercepts.clone(),
            sigmas: fit.sigmas.clone(),
            kkt_residuals: fit.kkt_residuals(),
            inner_sweeps: fit.inner_sweep_counts(),
            middle_rounds: fit.middle_round_counts(),
            nonconverged: fit.nonconverged().iter().map(|k| k + 1).collect(),
            stopped_early: fit.stopped_early.clone(),
            diagnostics: fit.diagnostics.clone(),
        }
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<(), CliError> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }

    pub fn read<R: Read>(r: R) -> Result<Self, CliError> {
        serde_json::from_reader(r).map_err(|e| CliError::Data(format!("malformed sidecar: {e}")))
    }
}

/// One nonzero coefficient of the path table.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEntry {
    /// 1-based.
    pub lambda_index: usize,
    pub lambda: f64,
    pub feature: String,
    pub coefficient: f64,
}

pub fn write_path_table<W: Write>(fit: &PathFit, w: W) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(PATH_HEADER)?;
    for k in 0..fit.len() {
        let index = (k + 1).to_string();
        let lambda = fmt_f64(fit.lambdas[k]);
        for (j, v) in fit.beta_path.column(k) {
            out.write_record([index.as_str(), lambda.as_str(), fit.feature_names[j].as_str(), &fmt_f64(v)])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_path_table<R: Read>(r: R) -> Result<Vec<PathEntry>, CliError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = reader.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != PATH_HEADER {
        return Err(CliError::Data(format!(
            "not a path table: expected header {}, found {}",
            PATH_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut entries = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Data(format!("malformed path table: {e}")))?;
        let bad = |what: &str| CliError::Data(format!("malformed path table at row {}: bad {what}", row + 2));
        let lambda_index: usize = record[0].parse().map_err(|_| bad("lambda_index"))?;
        if lambda_index == 0 {
            return Err(bad("lambda_index"));
        }
        entries.push(PathEntry {
            lambda_index,
            lambda: record[1].parse().map_err(|_| bad("lambda"))?,
            feature: record[2].to_string(),
            coefficient: record[3].parse().map_err(|_| bad("coefficient"))?,
        });
    }
    Ok(entries)
}
