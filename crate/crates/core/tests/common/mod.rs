//! Independent reference computations for the integration suites. Nothing
//! here calls into the solver.

#![allow(dead_code)]

use pathwise::{generate_synthetic, Dataset, Family, RegularizerKind, SyntheticSpec};

pub fn synthetic(n: usize, d: usize, s: usize, rho: f64, family: Family, noise_sd: f64, seed: u64) -> (Dataset, Vec<f64>) {
    generate_synthetic(&SyntheticSpec {
        n,
        d,
        sparsity: s,
        rho,
        family,
        noise_sd,
        seed,
    })
    .unwrap()
}

/// Penalty value written out from its textbook definition.
pub fn penalty(kind: RegularizerKind, gamma: f64, t: f64, lambda: f64) -> f64 {
    let a = t.abs();
    match kind {
        RegularizerKind::L1 => lambda * a,
        RegularizerKind::Mcp => {
            if a <= gamma * lambda {
                lambda * a - a * a / (2.0 * gamma)
            } else {
                gamma * lambda * lambda / 2.0
            }
        }
        RegularizerKind::Scad => {
            if a <= lambda {
                lambda * a
            } else if a <= gamma * lambda {
                (2.0 * gamma * lambda * a - a * a - lambda * lambda) / (2.0 * (gamma - 1.0))
            } else {
                lambda * lambda * (gamma + 1.0) / 2.0
            }
        }
    }
}

/// Global minimizer of `(v/2)t² − ut + p(t)` by dense grid search, a
/// golden-section pass and bisection on the sign of a numerical slope.
pub fn brute_force_threshold(kind: RegularizerKind, gamma: f64, u: f64, v: f64, lambda: f64) -> f64 {
    let phi = |t: f64| 0.5 * v * t * t - u * t + penalty(kind, gamma, t, lambda);
    // The minimizer lies in [-|u|/v', |u|/v'] with v' the effective curvature.
    let reach = 1.0 + u.abs() / (v - curvature_floor(kind, gamma)).max(1e-3);
    let m = 20_000;
    let h = 2.0 * reach / m as f64;
    let mut best = (0.0, phi(0.0));
    for k in 0..=m {
        let t = -reach + k as f64 * h;
        let f = phi(t);
        if f < best.1 {
            best = (t, f);
        }
    }
    let (mut a, mut b) = (best.0 - h, best.0 + h);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if phi(c) < phi(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let step = 1e-6 * (1.0 + reach);
    let slope = |t: f64| (phi(t + step) - phi(t - step)) / (2.0 * step);
    let (mut a, mut b) = (a - 10.0 * step, b + 10.0 * step);
    if slope(a) < 0.0 && slope(b) > 0.0 {
        for _ in 0..100 {
            let mid = 0.5 * (a + b);
            if slope(mid) < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
    }
    let t = 0.5 * (a + b);
    if phi(0.0) <= phi(t) {
        0.0
    } else {
        t
    }
}

pub fn curvature_floor(kind: RegularizerKind, gamma: f64) -> f64 {
    match kind {
        RegularizerKind::L1 => 0.0,
        RegularizerKind::Mcp => 1.0 / gamma,
        RegularizerKind::Scad => 1.0 / (gamma - 1.0),
    }
}

/// Column-major standardized design (mean 0, variance 1 with denominator n)
/// and the column statistics used.
pub struct Standardized {
    pub n: usize,
    pub cols: Vec<Vec<f64>>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

pub fn standardize(ds: &Dataset) -> Standardized {
    let n = ds.n();
    let mut cols = Vec::new();
    let mut means = Vec::new();
    let mut scales = Vec::new();
    for j in 0..ds.d() {
        let c = ds.x().col(j);
        let m = c.iter().sum::<f64>() / n as f64;
        let s = (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64).sqrt();
        cols.push(c.iter().map(|v| (v - m) / s).collect());
        means.push(m);
        scales.push(s);
    }
    Standardized { n, cols, means, scales }
}

impl Standardized {
    pub fn to_standard(&self, beta: &[f64]) -> Vec<f64> {
        beta.iter().zip(&self.scales).map(|(b, s)| b * s).collect()
    }

    pub fn xb(&self, beta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (c, &b) in self.cols.iter().zip(beta) {
            if b != 0.0 {
                for (o, x) in out.iter_mut().zip(c) {
                    *o += b * x;
                }
            }
        }
        out
    }

    pub fn xt(&self, r: &[f64]) -> Vec<f64> {
        self.cols.iter().map(|c| c.iter().zip(r).map(|(a, b)| a * b).sum()).collect()
    }
}

/// Lasso on standardized columns, `(1/2n)‖y − ȳ − Xβ‖² + λ‖β‖₁`, solved by
/// FISTA with adaptive restart until the duality gap is below `gap_tol`.
pub fn lasso_fista(z: &Standardized, y: &[f64], lambda: f64, gap_tol: f64) -> Vec<f64> {
    let n = z.n as f64;
    let ybar = y.iter().sum::<f64>() / n;
    let yc: Vec<f64> = y.iter().map(|v| v - ybar).collect();
    let d = z.cols.len();
    let lip = power_iteration(z) / n;
    let step = 1.0 / lip;

    let primal = |beta: &[f64]| {
        let xb = z.xb(beta);
        let rss: f64 = yc.iter().zip(&xb).map(|(a, b)| (a - b).powi(2)).sum();
        rss / (2.0 * n) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
    };
    let gap = |beta: &[f64]| {
        let xb = z.xb(beta);
        let r: Vec<f64> = yc.iter().zip(&xb).map(|(a, b)| a - b).collect();
        let corr = z.xt(&r);
        let cmax = corr.iter().fold(0.0f64, |m, c| m.max(c.abs())) / n;
        let scale = if cmax > lambda { lambda / cmax } else { 1.0 };
        // Dual objective for theta = scale * r / n.
        let theta: Vec<f64> = r.iter().map(|v| v * scale / n).collect();
        let dual: f64 = yc.iter().zip(&theta).map(|(a, t)| a * t).sum::<f64>()
            - n / 2.0 * theta.iter().map(|t| t * t).sum::<f64>();
        primal(beta) - dual
    };

    let mut beta = vec![0.0; d];
    let mut yk = beta.clone();
    let mut t = 1.0f64;
    for it in 0..200_000 {
        if it % 20 == 0 && gap(&beta) < gap_tol {
            break;
        }
        let xb = z.xb(&yk);
        let r: Vec<f64> = yc.iter().zip(&xb).map(|(a, b)| b - a).collect();
        let g = z.xt(&r);
        let next: Vec<f64> = yk
            .iter()
            .zip(&g)
            .map(|(&v, &gj)| {
                let w = v - step * gj / n;
                w.signum() * (w.abs() - step * lambda).max(0.0)
            })
            .collect();
        // Gradient-based adaptive restart.
        let restart: f64 = yk.iter().zip(&next).zip(&beta).map(|((y, x), b)| (y - x) * (x - b)).sum();
        if restart > 0.0 {
            t = 1.0;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mom = (t - 1.0) / t_next;
        yk = next.iter().zip(&beta).map(|(a, b)| a + mom * (a - b)).collect();
        beta = next;
        t = t_next;
    }
    assert!(gap(&beta) < gap_tol, "FISTA oracle did not reach the requested gap");
    beta
}

fn power_iteration(z: &Standardized) -> f64 {
    let d = z.cols.len();
    let mut v = vec![1.0 / (d as f64).sqrt(); d];
    let mut est = 0.0;
    for _ in 0..500 {
        let w = z.xt(&z.xb(&v));
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = w.iter().map(|x| x / norm).collect();
        if (norm - est).abs() < 1e-12 * norm {
            est = norm;
            break;
        }
        est = norm;
    }
    est * 1.01
}

/// Central finite difference of `f` along coordinate `j`.
pub fn central_difference(f: &dyn Fn(&[f64]) -> f64, x: &[f64], j: usize, h: f64) -> f64 {
    let mut p = x.to_vec();
    let mut m = x.to_vec();
    p[j] += h;
    m[j] -= h;
    (f(&p) - f(&m)) / (2.0 * h)
}

/// Loss gradient on standardized columns, computed from scratch.
pub fn standardized_gradient(z: &Standardized, y: &[f64], family: Family, beta: &[f64], intercept: f64) -> Vec<f64> {
    let n = z.n as f64;
    let xb = z.xb(beta);
    let dev: Vec<f64> = xb
        .iter()
        .zip(y)
        .map(|(&e, &yi)| {
            let eta = e + intercept;
            let mu = match family {
                Family::Gaussian | Family::ScaledGaussian => eta,
                Family::Binomial => 1.0 / (1.0 + (-eta.clamp(-30.0, 30.0)).exp()),
                Family::Poisson => eta.clamp(-30.0, 30.0).exp(),
            };
            mu - yi
        })
        .collect();
    z.xt(&dev).into_iter().map(|g| g / n).collect()
}

/// KKT violation of an L1 solution given its loss gradient.
pub fn l1_kkt(beta: &[f64], grad: &[f64], lambda: f64) -> f64 {
    beta.iter().zip(grad).fold(0.0f64, |w, (&b, &g)| {
        let v = if b == 0.0 {
            (g.abs() - lambda).max(0.0)
        } else {
            (g + lambda * b.signum()).abs()
        };
        w.max(v)
    })
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}
