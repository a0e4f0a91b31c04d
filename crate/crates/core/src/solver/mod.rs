//! Pathwise coordinate optimization.
//!
//! Three nested loops:
//!
//! 1. **Path** ([`fit_path`]): penalty levels are visited from `λ_max`
//!    downwards, each solve starting from the previous solution.
//! 2. **Active set** (`middle_loop`): the strong rule preselects coordinates,
//!    the inner solver runs on the active set only, and coordinates that
//!    violate the optimality conditions are admitted until none remain,
//!    first within the strong set and then over all coordinates.
//! 3. **Inner**: cyclic coordinate descent for squared error, or proximal
//!    Newton (IRLS model + coordinate descent) for the other losses.
//!
//! The scaled family alternates a squared-error solve at penalty `λσ` with
//! the update `σ = ‖y − Xβ − b‖/√n` until σ settles.

mod config;
mod engine;
mod path;

pub use config::{
    PathConfig, Screening, DEFAULT_LAMBDA_MIN_RATIO, DEFAULT_MAX_INNER_SWEEPS, DEFAULT_MAX_MIDDLE_ROUNDS,
    DEFAULT_MAX_NEWTON_STEPS, DEFAULT_NLAMBDA, DEFAULT_PREC,
};
pub use path::{LambdaDiagnostics, PathFit, SparsePath};

use engine::{Engine, GaussianEngine, NewtonEngine};

use crate::data::{Dataset, StandardizationRecord};
use crate::error::{Error, Result};
use crate::objectives::{self, sigma_from_rss, Family, GlmLoss, ObjectiveSpec};
use crate::regularizers::Penalty;

/// Times the inner tolerance is tightened when the KKT certificate misses
/// the requested precision.
const MAX_REFINEMENTS: usize = 4;

/// Relative slack on `|g_j| > λ` when admitting coordinates, so that a
/// gradient equal to `λ` up to rounding (as at `λ_max`) does not enter.
const ADMISSION_SLACK: f64 = 1e-12;

/// `λ_max = max_j |∂L/∂β_j|` at the null model (`β = 0`, optimal intercept,
/// and for the scaled family `σ = ‖y − ȳ‖/√n`).
pub fn lambda_max(dataset: &Dataset, objective: &ObjectiveSpec) -> Result<f64> {
    let family = objective.family();
    let zeros = vec![0.0; dataset.d()];
    let intercept = objectives::glm_loss(family).null_intercept(dataset.y())?;
    let sigma = match family {
        Family::ScaledGaussian => Some(objectives::sigma_update(dataset, &zeros, intercept).map_err(|_| {
            Error::DegenerateData("response is constant".into())
        })?),
        _ => None,
    };
    let (grad, _) = objectives::full_gradient(objective, dataset, &zeros, intercept, sigma)?;
    let lmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    check_lambda_max(lmax, dataset.y())
}

fn check_lambda_max(lmax: f64, y: &[f64]) -> Result<f64> {
    let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if !lmax.is_finite() || lmax <= 1e-12 * scale {
        return Err(Error::DegenerateData(
            "null-model gradient vanishes (constant response?)".into(),
        ));
    }
    Ok(lmax)
}

/// `nlambda` points spaced geometrically from `lmax` to `ratio · lmax`.
pub fn geometric_path(lmax: f64, nlambda: usize, ratio: f64) -> Vec<f64> {
    if nlambda == 1 {
        return vec![lmax];
    }
    let step = ratio.ln() / (nlambda - 1) as f64;
    (0..nlambda)
        .map(|k| if k == 0 { lmax } else { lmax * (step * k as f64).exp() })
        .collect()
}

/// Decreasing penalty levels for a (standardized) dataset. Explicit levels in
/// `config` are returned unchanged.
pub fn compute_lambda_path(dataset: &Dataset, objective: &ObjectiveSpec, config: &PathConfig) -> Result<Vec<f64>> {
    config.validate()?;
    if let Some(lambdas) = &config.lambdas {
        return Ok(lambdas.clone());
    }
    let lmax = lambda_max(dataset, objective)?;
    Ok(geometric_path(lmax, config.nlambda, config.lambda_min_ratio))
}

/// Strong-rule preselection: `{ j : |g_j| ≥ 2λ_k − λ_prev }` together with
/// the support of the previous solution. Sorted by coordinate.
pub fn strong_rule_preselect(grad_prev: &[f64], lambda_k: f64, lambda_prev: f64, beta_prev: &[f64]) -> Vec<usize> {
    let threshold = 2.0 * lambda_k - lambda_prev;
    grad_prev
        .iter()
        .zip(beta_prev)
        .enumerate()
        .filter(|(_, (g, b))| g.abs() >= threshold || **b != 0.0)
        .map(|(j, _)| j)
        .collect()
}

/// Maximum violation of the first-order optimality conditions given the
/// loss gradient `grad` at `beta`.
pub fn kkt_from_gradient(penalty: &dyn Penalty, beta: &[f64], grad: &[f64], lambda: f64) -> f64 {
    beta.iter().zip(grad).fold(0.0f64, |worst, (&b, &g)| {
        let violation = if b == 0.0 {
            (g.abs() - lambda).max(0.0)
        } else {
            (g + penalty.derivative(b.abs(), lambda) * b.signum()).abs()
        };
        worst.max(violation)
    })
}

/// KKT residual of `(beta, intercept)` for the penalized problem on `dataset`.
pub fn kkt_residual<P: Penalty + ?Sized>(
    dataset: &Dataset,
    objective: &ObjectiveSpec,
    penalty: &P,
    lambda: f64,
    beta: &[f64],
    intercept: f64,
    sigma: Option<f64>,
) -> Result<f64> {
    let (grad, _) = objectives::full_gradient(objective, dataset, beta, intercept, sigma)?;
    Ok(kkt_from_gradient(&DynPenalty(penalty), beta, &grad, lambda))
}

/// Adapts `&P` for `?Sized` penalties to `&dyn Penalty`.
struct DynPenalty<'a, P: Penalty + ?Sized>(&'a P);

impl<P: Penalty + ?Sized> Penalty for DynPenalty<'_, P> {
    fn value(&self, t: f64, lambda: f64) -> f64 {
        self.0.value(t, lambda)
    }
    fn derivative(&self, abs_t: f64, lambda: f64) -> f64 {
        self.0.derivative(abs_t, lambda)
    }
    fn threshold(&self, u: f64, v: f64, lambda: f64) -> Result<f64> {
        self.0.threshold(u, v, lambda)
    }
    fn curvature_floor(&self) -> f64 {
        self.0.curvature_floor()
    }
}

/// Active-set loop at one penalty level. `grad` holds the loss gradient at
/// the warm start on entry and at the returned solution on exit.
pub(crate) fn middle_loop(
    engine: &mut dyn Engine,
    penalty: &dyn Penalty,
    lambda: f64,
    lambda_prev: f64,
    grad: &mut [f64],
    config: &PathConfig,
) -> LambdaDiagnostics {
    let d = engine.dim();
    let mut diag = LambdaDiagnostics::default();
    let mut in_active = vec![false; d];
    let mut in_strong = vec![false; d];

    let (mut strong, mut active): (Vec<usize>, Vec<usize>) = match config.screening {
        Screening::StrongRule => (
            strong_rule_preselect(grad, lambda, lambda_prev.max(lambda), engine.beta()),
            (0..d).filter(|&j| engine.beta()[j] != 0.0).collect(),
        ),
        Screening::None => ((0..d).collect(), (0..d).collect()),
    };
    for &j in &strong {
        in_strong[j] = true;
    }
    for &j in &active {
        in_active[j] = true;
    }

    let admit = lambda * (1.0 + ADMISSION_SLACK);
    let mut tol = config.prec;
    let mut refinements = 0;
    let mut capped = false;
    let mut inner_converged = true;
    let mut kkt;
    loop {
        if diag.middle_rounds == config.max_middle_rounds {
            capped = true;
            engine.gradient(None, grad);
            diag.kkt_scans += 1;
            kkt = kkt_from_gradient(penalty, engine.beta(), grad, lambda);
            break;
        }
        diag.middle_rounds += 1;
        let before = engine.loss() + penalty.total(engine.beta(), lambda);
        let stats = engine.solve_active(&active, lambda, tol);
        let after = engine.loss() + penalty.total(engine.beta(), lambda);
        diag.inner_sweeps += stats.sweeps;
        diag.newton_steps += stats.newton_steps;
        diag.max_coordinate_change = stats.last_change;
        diag.objective_change = before - after;
        inner_converged = stats.converged;
        debug_assert!(
            (0..d).all(|j| in_active[j] || engine.beta()[j] == 0.0),
            "coordinate outside the active set moved"
        );

        let pending: Vec<usize> = strong.iter().copied().filter(|&j| !in_active[j]).collect();
        if !pending.is_empty() {
            engine.gradient(Some(&pending), grad);
            let added: Vec<usize> = pending.into_iter().filter(|&j| grad[j].abs() > admit).collect();
            if !added.is_empty() {
                for &j in &added {
                    in_active[j] = true;
                }
                active.extend(added);
                active.sort_unstable();
                diag.set_growths += 1;
                continue;
            }
        }

        engine.gradient(None, grad);
        diag.kkt_scans += 1;
        let violators: Vec<usize> = (0..d).filter(|&j| !in_active[j] && grad[j].abs() > admit).collect();
        if !violators.is_empty() {
            for &j in &violators {
                in_active[j] = true;
                if !in_strong[j] {
                    in_strong[j] = true;
                    strong.push(j);
                }
            }
            active.extend(violators);
            active.sort_unstable();
            diag.set_growths += 1;
            continue;
        }

        kkt = kkt_from_gradient(penalty, engine.beta(), grad, lambda);
        if kkt > config.prec && refinements < MAX_REFINEMENTS {
            tol *= 0.1;
            refinements += 1;
            continue;
        }
        break;
    }

    diag.kkt_residual = kkt;
    diag.active_size = active.len();
    diag.strong_size = strong.len();
    diag.objective = engine.loss() + penalty.total(engine.beta(), lambda);
    diag.converged = !capped && inner_converged && kkt <= config.prec;
    diag
}

enum EngineKind<'a> {
    Gaussian(GaussianEngine<'a>),
    Newton(NewtonEngine<'a>),
}

impl<'a> EngineKind<'a> {
    fn as_engine(&mut self) -> &mut dyn Engine {
        match self {
            EngineKind::Gaussian(e) => e,
            EngineKind::Newton(e) => e,
        }
    }

    fn engine(&self) -> &dyn Engine {
        match self {
            EngineKind::Gaussian(e) => e,
            EngineKind::Newton(e) => e,
        }
    }
}

/// Solver state carried along the path.
struct PathRunner<'a> {
    engine: EngineKind<'a>,
    penalty: &'a dyn Penalty,
    config: &'a PathConfig,
    /// Loss gradient at the current iterate (squared-error units for the
    /// scaled family).
    grad: Vec<f64>,
    /// Penalty level of the previous stage, in the engine's units.
    lambda_prev: f64,
    /// Current noise estimate (scaled family only).
    sigma: Option<f64>,
    n: usize,
}

impl<'a> PathRunner<'a> {
    fn new(
        x: &'a crate::matrix::DenseMatrix,
        y: &'a [f64],
        loss: Option<&'a dyn GlmLoss>,
        objective: Option<&ObjectiveSpec>,
        penalty: &'a dyn Penalty,
        config: &'a PathConfig,
    ) -> Result<Self> {
        let n = x.nrows();
        let family = objective.map(|o| o.family());
        let engine = match (family, loss) {
            (Some(Family::Gaussian), _) => EngineKind::Gaussian(GaussianEngine::new(
                x,
                y,
                penalty,
                objective.map(|o| o.gaussian_update()).unwrap_or_default(),
                config.max_inner_sweeps,
            )),
            (Some(Family::ScaledGaussian), _) => EngineKind::Gaussian(GaussianEngine::new(
                x,
                y,
                penalty,
                Default::default(),
                config.max_inner_sweeps,
            )),
            (Some(f), _) => {
                let loss = objectives::glm_loss(f);
                let b0 = loss.null_intercept(y)?;
                EngineKind::Newton(NewtonEngine::new(
                    x,
                    y,
                    loss,
                    penalty,
                    b0,
                    config.max_inner_sweeps,
                    config.max_newton_steps,
                ))
            }
            (None, Some(loss)) => {
                let b0 = loss.null_intercept(y)?;
                EngineKind::Newton(NewtonEngine::new(
                    x,
                    y,
                    loss,
                    penalty,
                    b0,
                    config.max_inner_sweeps,
                    config.max_newton_steps,
                ))
            }
            (None, None) => unreachable!("either a family or a custom loss is given"),
        };
        let sigma = match (family, &engine) {
            (Some(Family::ScaledGaussian), EngineKind::Gaussian(e)) => {
                Some(sigma_from_rss(e.rss(), n).map_err(|_| Error::DegenerateData("response is constant".into()))?)
            }
            _ => None,
        };
        let mut runner = PathRunner {
            engine,
            penalty,
            config,
            grad: vec![0.0; x.ncols()],
            lambda_prev: 0.0,
            sigma,
            n,
        };
        runner.engine.as_engine().gradient(None, &mut runner.grad);
        runner.lambda_prev = runner.grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        Ok(runner)
    }

    /// `λ_max` in the user's units.
    fn lambda_max(&self) -> f64 {
        match self.sigma {
            Some(s) => self.lambda_prev / s,
            None => self.lambda_prev,
        }
    }

    /// Solves at `lambda`, warm-started from the current state.
    fn stage(&mut self, lambda: f64) -> Result<LambdaDiagnostics> {
        let Some(mut sigma) = self.sigma else {
            let diag = middle_loop(
                self.engine.as_engine(),
                self.penalty,
                lambda,
                self.lambda_prev,
                &mut self.grad,
                self.config,
            );
            self.lambda_prev = lambda;
            return Ok(diag);
        };

        let mut total = LambdaDiagnostics::default();
        let mut last = LambdaDiagnostics::default();
        let mut settled = false;
        for _ in 0..self.config.max_newton_steps {
            let lambda_eff = lambda * sigma;
            last = middle_loop(
                self.engine.as_engine(),
                self.penalty,
                lambda_eff,
                self.lambda_prev,
                &mut self.grad,
                self.config,
            );
            self.lambda_prev = lambda_eff;
            total.absorb(&last);
            total.sigma_iterations += 1;
            let rss = match &self.engine {
                EngineKind::Gaussian(e) => e.rss(),
                EngineKind::Newton(_) => unreachable!("scaled family uses the squared-error engine"),
            };
            let updated = sigma_from_rss(rss, self.n)?;
            let change = (updated - sigma).abs();
            sigma = updated;
            if change < self.config.prec {
                settled = true;
                break;
            }
        }
        self.sigma = Some(sigma);

        // Report in the scaled loss's units at the final σ.
        let engine = self.engine.engine();
        let beta = engine.beta();
        let scaled_grad: Vec<f64> = self.grad.iter().map(|g| g / sigma).collect();
        total.kkt_residual = kkt_from_gradient(self.penalty, beta, &scaled_grad, lambda);
        total.objective = engine.loss() / sigma + 0.5 * sigma + self.penalty.total(beta, lambda);
        total.objective_change = last.objective_change / sigma;
        total.max_coordinate_change = last.max_coordinate_change;
        total.active_size = last.active_size;
        total.strong_size = last.strong_size;
        total.converged = settled && last.converged;
        Ok(total)
    }

    fn beta(&self) -> &[f64] {
        self.engine.engine().beta()
    }

    fn intercept(&self) -> f64 {
        self.engine.engine().intercept()
    }
}

fn prepare(dataset: &Dataset, config: &PathConfig) -> Result<(Dataset, StandardizationRecord)> {
    config.validate()?;
    let (std, record) = dataset.standardize();
    if std.d() == 0 {
        return Err(Error::DegenerateData("every feature column is constant".into()));
    }
    Ok((std, record))
}

/// Fits the regularization path of `objective` + `penalty` on `dataset`.
///
/// The design is standardized internally; coefficients and intercepts are
/// reported on the original scale. Penalty levels refer to the standardized
/// problem.
pub fn fit_path<P: Penalty>(
    dataset: &Dataset,
    objective: &ObjectiveSpec,
    penalty: &P,
    config: &PathConfig,
) -> Result<PathFit> {
    dataset.validate_for(objective.family())?;
    let (std, record) = prepare(dataset, config)?;
    let runner = PathRunner::new(std.x(), std.y(), None, Some(objective), penalty, config)?;
    run_path(runner, &std, record, dataset.feature_names().to_vec(), config)
}

/// Fits a path for a user-supplied smooth loss with the proximal Newton
/// solver.
pub fn fit_path_with_loss<P: Penalty>(
    dataset: &Dataset,
    loss: &dyn GlmLoss,
    penalty: &P,
    config: &PathConfig,
) -> Result<PathFit> {
    let (std, record) = prepare(dataset, config)?;
    let runner = PathRunner::new(std.x(), std.y(), Some(loss), None, penalty, config)?;
    run_path(runner, &std, record, dataset.feature_names().to_vec(), config)
}

fn run_path(
    mut runner: PathRunner<'_>,
    std: &Dataset,
    record: StandardizationRecord,
    feature_names: Vec<String>,
    config: &PathConfig,
) -> Result<PathFit> {
    let lmax = check_lambda_max(runner.lambda_max(), std.y())?;
    let lambdas = match &config.lambdas {
        Some(l) => {
            // Screen the first explicit level from wherever the null model sits.
            let top = l[0].max(lmax);
            runner.lambda_prev = runner.sigma.map_or(top, |s| top * s);
            l.clone()
        }
        None => geometric_path(lmax, config.nlambda, config.lambda_min_ratio),
    };

    let mut fit = PathFit {
        lambdas: Vec::with_capacity(lambdas.len()),
        beta_path: SparsePath::new(record.original_features),
        intercepts: Vec::with_capacity(lambdas.len()),
        sigmas: runner.sigma.map(|_| Vec::with_capacity(lambdas.len())),
        diagnostics: Vec::with_capacity(lambdas.len()),
        standardization: record,
        feature_names,
        stopped_early: None,
    };
    for &lambda in &lambdas {
        let diag = match runner.stage(lambda) {
            Ok(d) => d,
            Err(Error::DegenerateFit) if !fit.is_empty() => {
                log::warn!("residual vanished at lambda={lambda}; path stopped");
                fit.stopped_early = Some(format!("residual vanished at lambda={lambda}"));
                break;
            }
            Err(e) => return Err(e),
        };
        if !diag.converged {
            log::debug!("lambda={lambda} did not converge: {diag:?}");
        }
        let (beta, intercept) = fit.standardization.unstandardize(runner.beta(), runner.intercept());
        fit.beta_path.push_dense(&beta);
        fit.intercepts.push(intercept);
        if let (Some(sigmas), Some(s)) = (fit.sigmas.as_mut(), runner.sigma) {
            sigmas.push(s);
        }
        fit.lambdas.push(lambda);
        fit.diagnostics.push(diag);
    }
    Ok(fit)
}

/// A single-λ solution on the original scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub lambda: f64,
    pub beta: Vec<f64>,
    pub intercept: f64,
    pub sigma: Option<f64>,
    pub diagnostics: LambdaDiagnostics,
}

/// Solves at one penalty level from a zero start.
///
/// Only convex penalties are accepted: nonconvex fits depend on their
/// initialization and must be computed along a path with [`fit_path`].
pub fn fit_at_lambda<P: Penalty>(
    dataset: &Dataset,
    objective: &ObjectiveSpec,
    penalty: &P,
    lambda: f64,
    config: &PathConfig,
) -> Result<Solution> {
    if !penalty.is_convex() {
        return Err(Error::param(
            "cold-start fits are only available for convex penalties; use fit_path",
        ));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::param(format!("lambda must be positive, got {lambda}")));
    }
    dataset.validate_for(objective.family())?;
    let (std, record) = prepare(dataset, config)?;
    let mut runner = PathRunner::new(std.x(), std.y(), None, Some(objective), penalty, config)?;
    let lmax = runner.lambda_max();
    runner.lambda_prev = runner.sigma.map_or(lmax.max(lambda), |s| lmax.max(lambda) * s);
    let diagnostics = runner.stage(lambda)?;
    let (beta, intercept) = record.unstandardize(runner.beta(), runner.intercept());
    Ok(Solution {
        lambda,
        beta,
        intercept,
        sigma: runner.sigma,
        diagnostics,
    })
}
