//! Inner coordinate solvers.
//!
//! An engine owns the coefficient vector at one penalty level and optimizes
//! it over a given active set, leaving every other coordinate untouched.
//! Engines assume centered design columns, which is what
//! [`crate::data::Dataset::standardize`] produces.

use crate::matrix::{axpy, dot, weighted_dot, DenseMatrix};
use crate::objectives::{loss_from_eta, GaussianUpdate, GlmLoss, WEIGHT_FLOOR};
use crate::regularizers::Penalty;

/// Majorizing curvature used when the exact one-dimensional subproblem is not
/// strongly convex, as a multiple of the penalty's curvature floor.
const MAJORIZATION_MARGIN: f64 = 1.1;

/// Step halvings tried before a proximal Newton step is rejected.
const MAX_HALVINGS: usize = 20;

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct SolveStats {
    pub sweeps: usize,
    pub newton_steps: usize,
    /// Curvature-weighted change of the last sweep.
    pub last_change: f64,
    pub converged: bool,
}

pub(crate) trait Engine {
    fn dim(&self) -> usize;
    fn beta(&self) -> &[f64];
    fn intercept(&self) -> f64;

    /// Minimizes the penalized objective over `active` (plus the intercept).
    fn solve_active(&mut self, active: &[usize], lambda: f64, tol: f64) -> SolveStats;

    /// Writes `∂L/∂β_j` into `grad[j]` for each listed coordinate, or for all
    /// coordinates when `coords` is `None`.
    fn gradient(&mut self, coords: Option<&[usize]>, grad: &mut [f64]);

    /// Smooth loss at the current iterate.
    fn loss(&self) -> f64;
}

/// One coordinate step: exact threshold when well posed, otherwise the
/// threshold of a majorizing subproblem centered at `current`.
#[inline]
pub(crate) fn coordinate_step(penalty: &dyn Penalty, u: f64, v: f64, current: f64, lambda: f64) -> f64 {
    match penalty.threshold(u, v, lambda) {
        Ok(t) => t,
        Err(_) => {
            let vm = (penalty.curvature_floor() * MAJORIZATION_MARGIN).max(v);
            let um = u + (vm - v) * current;
            penalty.threshold(um, vm, lambda).unwrap_or(0.0)
        }
    }
}

/// Squared-error engine with naive (residual) or covariance (Gram) updates.
pub(crate) struct GaussianEngine<'a> {
    x: &'a DenseMatrix,
    y: &'a [f64],
    penalty: &'a dyn Penalty,
    mode: GaussianUpdate,
    max_sweeps: usize,
    beta: Vec<f64>,
    intercept: f64,
    /// `(1/n)‖x_j‖²`.
    col_sq: Vec<f64>,
    /// Naive mode: `y − b − Xβ`.
    resid: Vec<f64>,
    /// Covariance mode: `(1/n) x_jᵀ(y − b − Xβ)` for every `j`.
    corr: Vec<f64>,
    /// Covariance mode: `(1/n) Xᵀx_k`, filled when `k` first becomes active.
    gram: Vec<Option<Vec<f64>>>,
}

impl<'a> GaussianEngine<'a> {
    pub fn new(
        x: &'a DenseMatrix,
        y: &'a [f64],
        penalty: &'a dyn Penalty,
        mode: GaussianUpdate,
        max_sweeps: usize,
    ) -> Self {
        let n = x.nrows() as f64;
        let d = x.ncols();
        let intercept = y.iter().sum::<f64>() / n;
        let resid: Vec<f64> = y.iter().map(|v| v - intercept).collect();
        let col_sq = (0..d).map(|j| dot(x.col(j), x.col(j)) / n).collect();
        let (resid, corr, gram) = match mode {
            GaussianUpdate::Naive => (resid, Vec::new(), Vec::new()),
            GaussianUpdate::Covariance => {
                let corr = (0..d).map(|j| dot(x.col(j), &resid) / n).collect();
                (Vec::new(), corr, vec![None; d])
            }
        };
        GaussianEngine {
            x,
            y,
            penalty,
            mode,
            max_sweeps,
            beta: vec![0.0; d],
            intercept,
            col_sq,
            resid,
            corr,
            gram,
        }
    }

    fn n(&self) -> f64 {
        self.x.nrows() as f64
    }

    fn ensure_gram(&mut self, k: usize) {
        if self.gram[k].is_none() {
            let n = self.n();
            let xk = self.x.col(k);
            let col = (0..self.x.ncols()).map(|j| dot(self.x.col(j), xk) / n).collect();
            self.gram[k] = Some(col);
        }
    }

    /// `(1/n) x_jᵀ r`.
    #[inline]
    fn correlation(&self, j: usize) -> f64 {
        match self.mode {
            GaussianUpdate::Naive => dot(self.x.col(j), &self.resid) / self.n(),
            GaussianUpdate::Covariance => self.corr[j],
        }
    }

    /// Returns the curvature-weighted change.
    pub fn update_coordinate(&mut self, j: usize, lambda: f64) -> f64 {
        let v = self.col_sq[j];
        if v <= 0.0 {
            return 0.0;
        }
        let old = self.beta[j];
        let u = self.correlation(j) + v * old;
        let new = coordinate_step(self.penalty, u, v, old, lambda);
        let delta = new - old;
        if delta == 0.0 {
            return 0.0;
        }
        self.beta[j] = new;
        match self.mode {
            GaussianUpdate::Naive => axpy(-delta, self.x.col(j), &mut self.resid),
            GaussianUpdate::Covariance => {
                let g = self.gram[j].as_ref().expect("gram column cached for active coordinate");
                axpy(-delta, g, &mut self.corr);
            }
        }
        v * delta.abs()
    }

    /// One cyclic pass; returns the largest curvature-weighted change.
    pub fn sweep(&mut self, active: &[usize], lambda: f64) -> f64 {
        let mut max_change = 0.0f64;
        for &j in active {
            max_change = max_change.max(self.update_coordinate(j, lambda));
        }
        max_change
    }

    pub fn prepare(&mut self, active: &[usize]) {
        if self.mode == GaussianUpdate::Covariance {
            for &k in active {
                self.ensure_gram(k);
            }
        }
    }

    /// Residual sum of squares `‖y − b − Xβ‖²`.
    pub fn rss(&self) -> f64 {
        match self.mode {
            GaussianUpdate::Naive => dot(&self.resid, &self.resid),
            GaussianUpdate::Covariance => {
                let mut r: Vec<f64> = self.y.iter().map(|v| v - self.intercept).collect();
                for (j, &b) in self.beta.iter().enumerate() {
                    if b != 0.0 {
                        axpy(-b, self.x.col(j), &mut r);
                    }
                }
                dot(&r, &r)
            }
        }
    }

    #[cfg(test)]
    pub fn cached_gram_columns(&self) -> usize {
        self.gram.iter().filter(|g| g.is_some()).count()
    }
}

impl Engine for GaussianEngine<'_> {
    fn dim(&self) -> usize {
        self.beta.len()
    }

    fn beta(&self) -> &[f64] {
        &self.beta
    }

    fn intercept(&self) -> f64 {
        self.intercept
    }

    fn solve_active(&mut self, active: &[usize], lambda: f64, tol: f64) -> SolveStats {
        let mut stats = SolveStats::default();
        if active.is_empty() {
            stats.converged = true;
            return stats;
        }
        self.prepare(active);
        while stats.sweeps < self.max_sweeps {
            stats.sweeps += 1;
            stats.last_change = self.sweep(active, lambda);
            if stats.last_change < tol {
                stats.converged = true;
                break;
            }
        }
        stats
    }

    fn gradient(&mut self, coords: Option<&[usize]>, grad: &mut [f64]) {
        match coords {
            Some(cs) => {
                for &j in cs {
                    grad[j] = -self.correlation(j);
                }
            }
            None => {
                for (j, g) in grad.iter_mut().enumerate() {
                    *g = -self.correlation(j);
                }
            }
        }
    }

    fn loss(&self) -> f64 {
        self.rss() / (2.0 * self.n())
    }
}

/// Proximal Newton engine: repeatedly forms the IRLS model of a smooth loss
/// and minimizes the penalized model by coordinate descent.
pub(crate) struct NewtonEngine<'a> {
    x: &'a DenseMatrix,
    y: &'a [f64],
    loss: &'a dyn GlmLoss,
    penalty: &'a dyn Penalty,
    max_sweeps: usize,
    max_newton_steps: usize,
    beta: Vec<f64>,
    intercept: f64,
    eta: Vec<f64>,
    weights: Vec<f64>,
    work_resid: Vec<f64>,
    curvature: Vec<f64>,
}

impl<'a> NewtonEngine<'a> {
    pub fn new(
        x: &'a DenseMatrix,
        y: &'a [f64],
        loss: &'a dyn GlmLoss,
        penalty: &'a dyn Penalty,
        intercept: f64,
        max_sweeps: usize,
        max_newton_steps: usize,
    ) -> Self {
        let n = x.nrows();
        let d = x.ncols();
        NewtonEngine {
            x,
            y,
            loss,
            penalty,
            max_sweeps,
            max_newton_steps,
            beta: vec![0.0; d],
            intercept,
            eta: vec![intercept; n],
            weights: vec![0.0; n],
            work_resid: vec![0.0; n],
            curvature: vec![0.0; d],
        }
    }

    fn n(&self) -> f64 {
        self.x.nrows() as f64
    }

    pub fn penalized_objective(&self, lambda: f64) -> f64 {
        loss_from_eta(self.loss, self.y, &self.eta) + self.penalty.total(&self.beta, lambda)
    }

    /// One proximal Newton step over `active`.
    ///
    /// Returns the step outcome; the iterate only moves when the true
    /// penalized objective does not increase.
    pub fn newton_step(&mut self, active: &[usize], lambda: f64, tol: f64) -> NewtonStep {
        let n = self.n();
        let f_old = self.penalized_objective(lambda);

        // IRLS model: weights and working residual z − η.
        for i in 0..self.y.len() {
            let e = self.eta[i];
            let w = self.loss.weight(e).max(WEIGHT_FLOOR);
            self.weights[i] = w;
            self.work_resid[i] = -(self.loss.mean(e) - self.y[i]) / w;
        }
        let resid_start = self.work_resid.clone();
        for &j in active {
            self.curvature[j] = weighted_dot(&self.weights, self.x.col(j), self.x.col(j)) / n;
        }
        let weight_sum: f64 = self.weights.iter().sum();

        let old_active: Vec<f64> = active.iter().map(|&j| self.beta[j]).collect();
        let mut trial = self.beta.clone();
        let mut trial_intercept = self.intercept;

        let mut sweeps = 0;
        let mut inner_converged = false;
        let mut last_change = 0.0;
        while sweeps < self.max_sweeps {
            sweeps += 1;
            let shift = dot(&self.weights, &self.work_resid) / weight_sum;
            trial_intercept += shift;
            for r in self.work_resid.iter_mut() {
                *r -= shift;
            }
            let mut max_change = weight_sum / n * shift.abs();
            for &j in active {
                let v = self.curvature[j];
                let xj = self.x.col(j);
                let old = trial[j];
                let u = weighted_dot(&self.weights, xj, &self.work_resid) / n + v * old;
                let new = coordinate_step(self.penalty, u, v, old, lambda);
                let delta = new - old;
                if delta != 0.0 {
                    trial[j] = new;
                    axpy(-delta, xj, &mut self.work_resid);
                    max_change = max_change.max(v * delta.abs());
                }
            }
            last_change = max_change;
            if max_change < tol {
                inner_converged = true;
                break;
            }
        }

        // η̃ − η = (z − η) − (z − η̃).
        let deta: Vec<f64> = resid_start
            .iter()
            .zip(&self.work_resid)
            .map(|(a, b)| a - b)
            .collect();
        let dbeta: Vec<f64> = active
            .iter()
            .zip(&old_active)
            .map(|(&j, &old)| trial[j] - old)
            .collect();
        let dintercept = trial_intercept - self.intercept;
        // Same curvature-weighted scale as the sweep criterion.
        let full_change = active
            .iter()
            .zip(&dbeta)
            .fold(weight_sum / n * dintercept.abs(), |m, (&j, d)| {
                m.max(self.curvature[j] * d.abs())
            });

        let mut step = 1.0;
        let mut accepted = false;
        let slack = 1e-12 * (1.0 + f_old.abs());
        let mut eta_trial = vec![0.0; self.eta.len()];
        let mut beta_trial = self.beta.clone();
        for _ in 0..=MAX_HALVINGS {
            for (t, (&e, &de)) in eta_trial.iter_mut().zip(self.eta.iter().zip(&deta)) {
                *t = e + step * de;
            }
            for (k, &j) in active.iter().enumerate() {
                beta_trial[j] = old_active[k] + step * dbeta[k];
            }
            let f_new = loss_from_eta(self.loss, self.y, &eta_trial) + self.penalty.total(&beta_trial, lambda);
            // Tiny steps are accepted outright: the objective is flat to rounding there.
            if f_new <= f_old + slack || step * full_change < 1e-3 * tol {
                accepted = true;
                break;
            }
            step *= 0.5;
        }

        if accepted {
            self.eta = eta_trial;
            self.beta = beta_trial;
            self.intercept += step * dintercept;
        }
        NewtonStep {
            sweeps,
            inner_converged,
            last_change,
            accepted,
            change: if accepted { step * full_change } else { 0.0 },
        }
    }

    #[cfg(test)]
    pub fn set_beta(&mut self, beta: Vec<f64>, intercept: f64) {
        self.intercept = intercept;
        self.eta = vec![intercept; self.y.len()];
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                axpy(b, self.x.col(j), &mut self.eta);
            }
        }
        self.beta = beta;
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct NewtonStep {
    pub sweeps: usize,
    pub inner_converged: bool,
    pub last_change: f64,
    pub accepted: bool,
    /// Curvature-weighted change of coefficients and intercept actually
    /// applied.
    pub change: f64,
}

impl Engine for NewtonEngine<'_> {
    fn dim(&self) -> usize {
        self.beta.len()
    }

    fn beta(&self) -> &[f64] {
        &self.beta
    }

    fn intercept(&self) -> f64 {
        self.intercept
    }

    fn solve_active(&mut self, active: &[usize], lambda: f64, tol: f64) -> SolveStats {
        let mut stats = SolveStats::default();
        let mut all_inner_converged = true;
        while stats.newton_steps < self.max_newton_steps {
            stats.newton_steps += 1;
            let step = self.newton_step(active, lambda, tol);
            stats.sweeps += step.sweeps;
            stats.last_change = step.last_change;
            all_inner_converged &= step.inner_converged;
            if !step.accepted {
                log::debug!("proximal Newton step rejected after {MAX_HALVINGS} halvings");
                return stats;
            }
            if step.change < tol {
                stats.converged = all_inner_converged || step.inner_converged;
                return stats;
            }
        }
        stats
    }

    fn gradient(&mut self, coords: Option<&[usize]>, grad: &mut [f64]) {
        let n = self.n();
        let dev: Vec<f64> = self
            .eta
            .iter()
            .zip(self.y)
            .map(|(&e, &y)| self.loss.mean(e) - y)
            .collect();
        match coords {
            Some(cs) => {
                for &j in cs {
                    grad[j] = dot(self.x.col(j), &dev) / n;
                }
            }
            None => {
                for (j, g) in grad.iter_mut().enumerate() {
                    *g = dot(self.x.col(j), &dev) / n;
                }
            }
        }
    }

    fn loss(&self) -> f64 {
        loss_from_eta(self.loss, self.y, &self.eta)
    }
}
