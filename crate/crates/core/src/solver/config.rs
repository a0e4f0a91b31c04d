use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_NLAMBDA: usize = 100;
pub const DEFAULT_LAMBDA_MIN_RATIO: f64 = 0.05;
pub const DEFAULT_PREC: f64 = 1e-4;
pub const DEFAULT_MAX_INNER_SWEEPS: usize = 1000;
pub const DEFAULT_MAX_MIDDLE_ROUNDS: usize = 100;
pub const DEFAULT_MAX_NEWTON_STEPS: usize = 50;

/// Coordinate preselection at each path point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Screening {
    /// Strong-rule preselection with active-set growth and a full KKT scan.
    #[default]
    StrongRule,
    /// Cyclic descent over every coordinate. Used as a benchmark baseline.
    None,
}

/// Controls for the regularization path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    pub nlambda: usize,
    pub lambda_min_ratio: f64,
    /// Explicit strictly decreasing penalty levels; overrides `nlambda` and
    /// `lambda_min_ratio`.
    pub lambdas: Option<Vec<f64>>,
    /// Convergence precision, reused by the inner, Newton and σ loops.
    pub prec: f64,
    pub max_inner_sweeps: usize,
    pub max_middle_rounds: usize,
    pub max_newton_steps: usize,
    pub screening: Screening,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig {
            nlambda: DEFAULT_NLAMBDA,
            lambda_min_ratio: DEFAULT_LAMBDA_MIN_RATIO,
            lambdas: None,
            prec: DEFAULT_PREC,
            max_inner_sweeps: DEFAULT_MAX_INNER_SWEEPS,
            max_middle_rounds: DEFAULT_MAX_MIDDLE_ROUNDS,
            max_newton_steps: DEFAULT_MAX_NEWTON_STEPS,
            screening: Screening::StrongRule,
        }
    }
}

impl PathConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(lambdas) = &self.lambdas {
            if lambdas.is_empty() {
                return Err(Error::param("explicit lambda sequence is empty"));
            }
            if lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
                return Err(Error::param("explicit lambdas must be finite and positive"));
            }
            if lambdas.windows(2).any(|w| w[1] >= w[0]) {
                return Err(Error::param("explicit lambdas must be strictly decreasing"));
            }
        } else {
            if self.nlambda == 0 {
                return Err(Error::param("nlambda must be at least 1"));
            }
            if !(self.lambda_min_ratio > 0.0 && self.lambda_min_ratio < 1.0) {
                return Err(Error::param(format!(
                    "lambda_min_ratio must lie in (0, 1), got {}",
                    self.lambda_min_ratio
                )));
            }
        }
        if !(self.prec > 0.0 && self.prec.is_finite()) {
            return Err(Error::param(format!("prec must be positive, got {}", self.prec)));
        }
        if self.max_inner_sweeps == 0 || self.max_middle_rounds == 0 || self.max_newton_steps == 0 {
            return Err(Error::param("iteration caps must be positive"));
        }
        Ok(())
    }
}
