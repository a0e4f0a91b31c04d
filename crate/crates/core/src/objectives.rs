//! Loss families: value, gradient and the local weighted-least-squares
//! (IRLS) model used by the proximal Newton solver.
//!
//! All losses are averaged over the `n` observations. The linear predictor is
//! `η = b + Xβ` with an unpenalized intercept `b`.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::matrix::{self, axpy, dot};

/// Linear predictors are clamped to this range before exponentiation.
pub const ETA_CLAMP: f64 = 30.0;

/// Lower bound on IRLS weights.
pub const WEIGHT_FLOOR: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    Binomial,
    Poisson,
    /// Gaussian likelihood with jointly estimated noise level σ.
    ScaledGaussian,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Gaussian => "gaussian",
            Family::Binomial => "binomial",
            Family::Poisson => "poisson",
            Family::ScaledGaussian => "scaled_gaussian",
        })
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Family::Gaussian),
            "binomial" | "logistic" => Ok(Family::Binomial),
            "poisson" => Ok(Family::Poisson),
            "scaled_gaussian" | "scaled-gaussian" | "sqrtlasso" => Ok(Family::ScaledGaussian),
            other => Err(Error::param(format!("unknown family '{other}'"))),
        }
    }
}

/// How the Gaussian coordinate solver tracks residual information.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GaussianUpdate {
    /// Maintain the residual vector; each coordinate costs O(n).
    #[default]
    Naive,
    /// Maintain feature/residual correlations using cached Gram columns.
    Covariance,
}

impl std::fmt::Display for GaussianUpdate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GaussianUpdate::Naive => "naive",
            GaussianUpdate::Covariance => "covariance",
        })
    }
}

impl std::str::FromStr for GaussianUpdate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "naive" => Ok(GaussianUpdate::Naive),
            "covariance" => Ok(GaussianUpdate::Covariance),
            other => Err(Error::param(format!("unknown gaussian update '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    family: Family,
    gaussian_update: GaussianUpdate,
}

impl ObjectiveSpec {
    pub fn new(family: Family) -> Self {
        ObjectiveSpec {
            family,
            gaussian_update: GaussianUpdate::Naive,
        }
    }

    pub fn gaussian(update: GaussianUpdate) -> Self {
        ObjectiveSpec {
            family: Family::Gaussian,
            gaussian_update: update,
        }
    }

    /// Only the Gaussian family accepts an update mode.
    pub fn with_gaussian_update(self, update: GaussianUpdate) -> Result<Self> {
        if self.family != Family::Gaussian {
            return Err(Error::param(format!(
                "gaussian update mode is not applicable to the {} family",
                self.family
            )));
        }
        Ok(ObjectiveSpec {
            gaussian_update: update,
            ..self
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn gaussian_update(&self) -> GaussianUpdate {
        self.gaussian_update
    }
}

/// A pointwise loss `ℓ(η, y)` whose gradient in `η` is `μ(η) − y`.
///
/// Implement this to fit a custom generalized linear model with
/// [`crate::solver::fit_path_with_loss`].
pub trait GlmLoss {
    fn loss(&self, eta: f64, y: f64) -> f64;

    /// Mean function `μ(η)`.
    fn mean(&self, eta: f64) -> f64;

    /// `∂²ℓ/∂η²`, before flooring.
    fn weight(&self, eta: f64) -> f64;

    /// Optimal intercept of the model with `β = 0`.
    fn null_intercept(&self, y: &[f64]) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianLoss;

#[derive(Debug, Clone, Copy, Default)]
pub struct BinomialLoss;

#[derive(Debug, Clone, Copy, Default)]
pub struct PoissonLoss;

impl GlmLoss for GaussianLoss {
    fn loss(&self, eta: f64, y: f64) -> f64 {
        0.5 * (y - eta) * (y - eta)
    }

    fn mean(&self, eta: f64) -> f64 {
        eta
    }

    fn weight(&self, _eta: f64) -> f64 {
        1.0
    }

    fn null_intercept(&self, y: &[f64]) -> Result<f64> {
        Ok(matrix::mean(y))
    }
}

#[inline]
fn clamp_eta(eta: f64) -> f64 {
    eta.clamp(-ETA_CLAMP, ETA_CLAMP)
}

/// `log(1 + exp(x))` without overflow.
#[inline]
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

impl GlmLoss for BinomialLoss {
    fn loss(&self, eta: f64, y: f64) -> f64 {
        softplus(eta) - y * eta
    }

    fn mean(&self, eta: f64) -> f64 {
        1.0 / (1.0 + (-clamp_eta(eta)).exp())
    }

    fn weight(&self, eta: f64) -> f64 {
        let p = self.mean(eta);
        p * (1.0 - p)
    }

    fn null_intercept(&self, y: &[f64]) -> Result<f64> {
        let p = matrix::mean(y);
        if p <= 0.0 || p >= 1.0 {
            return Err(Error::DegenerateData(
                "binomial response contains a single class".into(),
            ));
        }
        Ok((p / (1.0 - p)).ln())
    }
}

impl GlmLoss for PoissonLoss {
    fn loss(&self, eta: f64, y: f64) -> f64 {
        clamp_eta(eta).exp() - y * eta
    }

    fn mean(&self, eta: f64) -> f64 {
        clamp_eta(eta).exp()
    }

    fn weight(&self, eta: f64) -> f64 {
        clamp_eta(eta).exp()
    }

    fn null_intercept(&self, y: &[f64]) -> Result<f64> {
        let m = matrix::mean(y);
        if m <= 0.0 {
            return Err(Error::DegenerateData("poisson response is identically zero".into()));
        }
        Ok(m.ln())
    }
}

/// The pointwise loss behind a non-scaled family.
pub fn glm_loss(family: Family) -> &'static dyn GlmLoss {
    match family {
        Family::Gaussian | Family::ScaledGaussian => &GaussianLoss,
        Family::Binomial => &BinomialLoss,
        Family::Poisson => &PoissonLoss,
    }
}

/// `b + Xβ`, skipping zero coefficients.
pub fn linear_predictor(dataset: &Dataset, beta: &[f64], intercept: f64) -> Result<Vec<f64>> {
    if beta.len() != dataset.d() {
        return Err(Error::param(format!(
            "coefficient vector has length {}, expected {}",
            beta.len(),
            dataset.d()
        )));
    }
    let mut eta = vec![intercept; dataset.n()];
    for (j, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            axpy(b, dataset.x().col(j), &mut eta);
        }
    }
    if eta.iter().any(|v| !v.is_finite()) {
        return Err(Error::Evaluation("non-finite linear predictor".into()));
    }
    Ok(eta)
}

fn check_sigma(spec: &ObjectiveSpec, sigma: Option<f64>) -> Result<Option<f64>> {
    match (spec.family, sigma) {
        (Family::ScaledGaussian, Some(s)) if s > 0.0 && s.is_finite() => Ok(Some(s)),
        (Family::ScaledGaussian, Some(s)) => Err(Error::param(format!("sigma must be positive, got {s}"))),
        (Family::ScaledGaussian, None) => Err(Error::param("scaled gaussian loss requires sigma")),
        (_, Some(_)) => Err(Error::param("sigma applies only to the scaled gaussian family")),
        (_, None) => Ok(None),
    }
}

/// Averaged loss from a precomputed linear predictor.
pub(crate) fn loss_from_eta(loss: &dyn GlmLoss, y: &[f64], eta: &[f64]) -> f64 {
    let n = y.len() as f64;
    eta.iter().zip(y).map(|(&e, &yi)| loss.loss(e, yi)).sum::<f64>() / n
}

/// Averaged loss `L(β, b)`; `sigma` must be given exactly for the scaled
/// family.
pub fn loss_value(
    spec: &ObjectiveSpec,
    dataset: &Dataset,
    beta: &[f64],
    intercept: f64,
    sigma: Option<f64>,
) -> Result<f64> {
    let sigma = check_sigma(spec, sigma)?;
    let eta = linear_predictor(dataset, beta, intercept)?;
    let value = match sigma {
        Some(s) => {
            let rss: f64 = eta.iter().zip(dataset.y()).map(|(e, y)| (y - e) * (y - e)).sum();
            rss / (2.0 * dataset.n() as f64 * s) + 0.5 * s
        }
        None => loss_from_eta(glm_loss(spec.family), dataset.y(), &eta),
    };
    if !value.is_finite() {
        return Err(Error::Evaluation("non-finite loss".into()));
    }
    Ok(value)
}

/// Gradient of [`loss_value`] with respect to `β` and the intercept.
pub fn full_gradient(
    spec: &ObjectiveSpec,
    dataset: &Dataset,
    beta: &[f64],
    intercept: f64,
    sigma: Option<f64>,
) -> Result<(Vec<f64>, f64)> {
    let sigma = check_sigma(spec, sigma)?;
    let eta = linear_predictor(dataset, beta, intercept)?;
    let loss = glm_loss(spec.family);
    let n = dataset.n() as f64;
    let scale = n * sigma.unwrap_or(1.0);
    let dev: Vec<f64> = eta
        .iter()
        .zip(dataset.y())
        .map(|(&e, &y)| loss.mean(e) - y)
        .collect();
    let grad = (0..dataset.d())
        .map(|j| dot(dataset.x().col(j), &dev) / scale)
        .collect();
    let grad_intercept = dev.iter().sum::<f64>() / scale;
    Ok((grad, grad_intercept))
}

/// Second-order (IRLS) model of a loss at the current linear predictor:
/// `L(η') ≈ base_loss + (1/2n) Σ w_i (z_i − η'_i)² + const`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    pub weights: Vec<f64>,
    pub working_response: Vec<f64>,
    pub base_loss: f64,
}

pub(crate) fn quadratic_from_eta(loss: &dyn GlmLoss, y: &[f64], eta: &[f64]) -> QuadraticModel {
    let mut weights = Vec::with_capacity(y.len());
    let mut working_response = Vec::with_capacity(y.len());
    for (&e, &yi) in eta.iter().zip(y) {
        let w = loss.weight(e).max(WEIGHT_FLOOR);
        weights.push(w);
        working_response.push(e - (loss.mean(e) - yi) / w);
    }
    QuadraticModel {
        weights,
        working_response,
        base_loss: loss_from_eta(loss, y, eta),
    }
}

/// IRLS model for the binomial and poisson families.
pub fn quadratic_approx(
    spec: &ObjectiveSpec,
    dataset: &Dataset,
    beta: &[f64],
    intercept: f64,
) -> Result<QuadraticModel> {
    match spec.family {
        Family::Binomial | Family::Poisson => {}
        other => {
            return Err(Error::param(format!(
                "quadratic approximation is only used for binomial and poisson, not {other}"
            )))
        }
    }
    let eta = linear_predictor(dataset, beta, intercept)?;
    Ok(quadratic_from_eta(glm_loss(spec.family), dataset.y(), &eta))
}

/// Residual root-mean-square: `‖y − Xβ − b‖ / √n`.
pub fn sigma_update(dataset: &Dataset, beta: &[f64], intercept: f64) -> Result<f64> {
    let eta = linear_predictor(dataset, beta, intercept)?;
    let rss: f64 = eta.iter().zip(dataset.y()).map(|(e, y)| (y - e) * (y - e)).sum();
    sigma_from_rss(rss, dataset.n())
}

pub(crate) fn sigma_from_rss(rss: f64, n: usize) -> Result<f64> {
    let sigma = (rss / n as f64).sqrt();
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::DegenerateFit);
    }
    Ok(sigma)
}
