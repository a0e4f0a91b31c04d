//! Timing harness: fits full paths on synthetic data, with and without
//! coordinate screening.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{generate_synthetic, SyntheticSpec};
use crate::error::{Error, Result};
use crate::objectives::{Family, ObjectiveSpec};
use crate::regularizers::RegularizerSpec;
use crate::solver::{fit_path, PathConfig, PathFit, Screening};

/// Default upper bound on `n · d`.
pub const DEFAULT_MAX_CELLS: usize = 20_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub n: usize,
    pub d: usize,
    pub sparsity: usize,
    pub rho: f64,
    pub noise_sd: f64,
    pub family: Family,
    pub regularizer: RegularizerSpec,
    pub seed: u64,
    pub repetitions: usize,
    pub nlambda: usize,
    pub lambda_min_ratio: f64,
    pub prec: f64,
    /// Also time the unscreened baseline.
    pub baseline: bool,
    pub max_cells: usize,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec {
            n: 500,
            d: 5000,
            sparsity: 10,
            rho: 0.5,
            noise_sd: 1.0,
            family: Family::Gaussian,
            regularizer: RegularizerSpec::l1(),
            seed: 1,
            repetitions: 10,
            nlambda: 100,
            lambda_min_ratio: 0.05,
            prec: 1e-4,
            baseline: true,
            max_cells: DEFAULT_MAX_CELLS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub screening: Screening,
    pub seconds: Vec<f64>,
    pub mean_seconds: f64,
    pub sd_seconds: f64,
    /// Penalized objective at the last penalty level.
    pub final_objective: f64,
    pub total_kkt_scans: usize,
    pub total_inner_sweeps: usize,
    pub nonconverged_points: usize,
    pub path_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub spec: BenchSpec,
    pub screened: RunSummary,
    pub baseline: Option<RunSummary>,
    /// Baseline mean time over screened mean time.
    pub speedup: Option<f64>,
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    (m, var.sqrt())
}

fn time_runs(
    data: &crate::data::Dataset,
    spec: &BenchSpec,
    objective: &ObjectiveSpec,
    screening: Screening,
) -> Result<RunSummary> {
    let config = PathConfig {
        nlambda: spec.nlambda,
        lambda_min_ratio: spec.lambda_min_ratio,
        prec: spec.prec,
        screening,
        ..Default::default()
    };
    let mut seconds = Vec::with_capacity(spec.repetitions);
    let mut last: Option<PathFit> = None;
    for _ in 0..spec.repetitions {
        let start = Instant::now();
        let fit = fit_path(data, objective, &spec.regularizer, &config)?;
        seconds.push(start.elapsed().as_secs_f64());
        last = Some(fit);
    }
    let fit = last.expect("at least one repetition");
    let (mean_seconds, sd_seconds) = mean_sd(&seconds);
    Ok(RunSummary {
        screening,
        seconds,
        mean_seconds,
        sd_seconds,
        final_objective: fit.diagnostics.last().map_or(f64::NAN, |d| d.objective),
        total_kkt_scans: fit.total_kkt_scans(),
        total_inner_sweeps: fit.inner_sweep_counts().iter().sum(),
        nonconverged_points: fit.nonconverged().len(),
        path_points: fit.len(),
    })
}

/// Generates the synthetic problem once and times `repetitions` full path
/// fits with strong-rule screening, then optionally without.
pub fn run_benchmark(spec: &BenchSpec) -> Result<BenchReport> {
    if spec.repetitions == 0 {
        return Err(Error::Parameter("repetitions must be at least 1".into()));
    }
    let cells = spec.n.saturating_mul(spec.d);
    if cells > spec.max_cells {
        return Err(Error::Parameter(format!(
            "problem size n*d = {cells} exceeds the cap of {}",
            spec.max_cells
        )));
    }
    let (data, _) = generate_synthetic(&SyntheticSpec {
        n: spec.n,
        d: spec.d,
        sparsity: spec.sparsity,
        rho: spec.rho,
        family: spec.family,
        noise_sd: spec.noise_sd,
        seed: spec.seed,
    })?;
    let objective = ObjectiveSpec::new(spec.family);
    let screened = time_runs(&data, spec, &objective, Screening::StrongRule)?;
    let baseline = if spec.baseline {
        Some(time_runs(&data, spec, &objective, Screening::None)?)
    } else {
        None
    };
    let speedup = baseline.as_ref().map(|b| b.mean_seconds / screened.mean_seconds);
    Ok(BenchReport {
        spec: spec.clone(),
        screened,
        baseline,
        speedup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cap_enforced() {
        let spec = BenchSpec { n: 1000, d: 1000, max_cells: 10, ..Default::default() };
        assert!(matches!(run_benchmark(&spec), Err(Error::Parameter(_))));
    }

    #[test]
    fn small_run_is_deterministic() {
        let spec = BenchSpec { n: 60, d: 100, sparsity: 3, repetitions: 2, nlambda: 15, ..Default::default() };
        let a = run_benchmark(&spec).unwrap();
        let b = run_benchmark(&spec).unwrap();
        assert_eq!(a.screened.final_objective, b.screened.final_objective);
        assert_eq!(a.screened.seconds.len(), 2);
        assert_eq!(a.screened.path_points, 15);
        let base = a.baseline.unwrap();
        assert!((base.final_objective - a.screened.final_objective).abs() < 1e-3);
    }
}
