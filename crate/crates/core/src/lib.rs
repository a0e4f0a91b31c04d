//! Pathwise coordinate optimization for sparse regression.
//!
//! Fits regularization paths for squared-error, logistic, Poisson and scaled
//! (noise-level estimating) linear regression under the L1, MCP and SCAD
//! penalties. Paths are computed from the largest useful penalty downwards
//! with warm starts, strong-rule coordinate preselection, active-set
//! iteration and a full KKT check at every penalty level.
//!
//! ```
//! use pathwise::{fit_path, generate_synthetic, Family, ObjectiveSpec, PathConfig, RegularizerSpec, SyntheticSpec};
//!
//! let (data, _truth) = generate_synthetic(&SyntheticSpec {
//!     n: 100, d: 40, sparsity: 4, rho: 0.5,
//!     family: Family::Gaussian, noise_sd: 0.5, seed: 7,
//! }).unwrap();
//! let config = PathConfig { nlambda: 20, ..Default::default() };
//! let fit = fit_path(&data, &ObjectiveSpec::new(Family::Gaussian), &RegularizerSpec::l1(), &config).unwrap();
//! assert_eq!(fit.len(), 20);
//! assert!(fit.kkt_residuals().iter().all(|&r| r <= config.prec));
//! ```

pub mod data;
pub mod error;
pub mod harness;
pub mod matrix;
pub mod objectives;
pub mod regularizers;
pub mod solver;

pub use data::{generate_synthetic, load_csv, read_csv, Dataset, ResponseColumn, StandardizationRecord, SyntheticSpec};
pub use error::{Error, Result};
pub use matrix::DenseMatrix;
pub use objectives::{
    full_gradient, loss_value, quadratic_approx, sigma_update, Family, GaussianUpdate, GlmLoss, ObjectiveSpec,
    QuadraticModel,
};
pub use regularizers::{penalty_value, scalar_threshold, Penalty, RegularizerKind, RegularizerSpec};
pub use solver::{
    compute_lambda_path, fit_at_lambda, fit_path, fit_path_with_loss, kkt_residual, lambda_max,
    strong_rule_preselect, LambdaDiagnostics, PathConfig, PathFit, Screening, Solution, SparsePath,
};

/// Library version, echoed in fit outputs.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
