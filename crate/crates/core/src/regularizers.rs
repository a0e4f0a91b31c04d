//! Sparsity-inducing penalties and their scalar thresholding operators.
//!
//! Every penalty `p_λ(t)` here is symmetric, nondecreasing in `|t|` and has
//! `p_λ(0) = 0`. The thresholding operator solves the one-dimensional
//! coordinate subproblem
//!
//! ```text
//! argmin_t  (v/2) t² − u t + p_λ(t)
//! ```
//!
//! where `u` is the coordinate's (curvature-scaled) residual correlation and
//! `v` its curvature. For the nonconvex penalties the subproblem is strongly
//! convex only when `v` exceeds the penalty's concavity, see
//! [`Penalty::curvature_floor`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MCP_GAMMA: f64 = 3.0;
pub const DEFAULT_SCAD_GAMMA: f64 = 3.7;

/// The regularizer abstraction the solver is written against.
///
/// Implement this to plug a custom penalty into [`crate::solver::fit_path`].
pub trait Penalty {
    /// `p_λ(t)`.
    fn value(&self, t: f64, lambda: f64) -> f64;

    /// Right derivative `p'_λ(s)` at `s = |t| ≥ 0`.
    fn derivative(&self, abs_t: f64, lambda: f64) -> f64;

    /// Global minimizer of `(v/2) t² − u t + p_λ(t)`.
    ///
    /// Fails with [`Error::DegenerateCurvature`] when `v` does not exceed
    /// [`Penalty::curvature_floor`].
    fn threshold(&self, u: f64, v: f64, lambda: f64) -> Result<f64>;

    /// Curvature below which the coordinate subproblem loses strong convexity.
    /// Zero for convex penalties.
    fn curvature_floor(&self) -> f64;

    fn is_convex(&self) -> bool {
        self.curvature_floor() == 0.0
    }

    /// `Σ_j p_λ(β_j)`.
    fn total(&self, beta: &[f64], lambda: f64) -> f64 {
        beta.iter()
            .filter(|b| **b != 0.0)
            .map(|&b| self.value(b, lambda))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegularizerKind {
    L1,
    Mcp,
    Scad,
}

impl std::fmt::Display for RegularizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RegularizerKind::L1 => "l1",
            RegularizerKind::Mcp => "mcp",
            RegularizerKind::Scad => "scad",
        })
    }
}

impl std::str::FromStr for RegularizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" | "lasso" => Ok(RegularizerKind::L1),
            "mcp" => Ok(RegularizerKind::Mcp),
            "scad" => Ok(RegularizerKind::Scad),
            other => Err(Error::param(format!("unknown regularizer '{other}'"))),
        }
    }
}

/// A penalty family together with its concavity parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizerSpec {
    kind: RegularizerKind,
    gamma: f64,
}

impl RegularizerSpec {
    /// `gamma = None` selects the family default (MCP 3.0, SCAD 3.7).
    pub fn new(kind: RegularizerKind, gamma: Option<f64>) -> Result<Self> {
        let gamma = match kind {
            RegularizerKind::L1 => gamma.unwrap_or(f64::INFINITY),
            RegularizerKind::Mcp => gamma.unwrap_or(DEFAULT_MCP_GAMMA),
            RegularizerKind::Scad => gamma.unwrap_or(DEFAULT_SCAD_GAMMA),
        };
        let spec = RegularizerSpec { kind, gamma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn l1() -> Self {
        RegularizerSpec {
            kind: RegularizerKind::L1,
            gamma: f64::INFINITY,
        }
    }

    pub fn mcp(gamma: f64) -> Result<Self> {
        Self::new(RegularizerKind::Mcp, Some(gamma))
    }

    pub fn scad(gamma: f64) -> Result<Self> {
        Self::new(RegularizerKind::Scad, Some(gamma))
    }

    pub fn kind(&self) -> RegularizerKind {
        self.kind
    }

    /// Concavity parameter; `None` for L1.
    pub fn gamma(&self) -> Option<f64> {
        match self.kind {
            RegularizerKind::L1 => None,
            _ => Some(self.gamma),
        }
    }

    fn validate(&self) -> Result<()> {
        match self.kind {
            RegularizerKind::L1 => Ok(()),
            RegularizerKind::Mcp if self.gamma.is_finite() && self.gamma > 1.0 => Ok(()),
            RegularizerKind::Scad if self.gamma.is_finite() && self.gamma > 2.0 => Ok(()),
            RegularizerKind::Mcp => Err(Error::param(format!(
                "MCP requires a finite gamma > 1, got {}",
                self.gamma
            ))),
            RegularizerKind::Scad => Err(Error::param(format!(
                "SCAD requires a finite gamma > 2, got {}",
                self.gamma
            ))),
        }
    }
}

/// `sign(z) · max(|z| − a, 0)`. Ties at `|z| = a` map to zero.
#[inline]
pub fn soft_threshold(z: f64, a: f64) -> f64 {
    if z > a {
        z - a
    } else if z < -a {
        z + a
    } else {
        0.0
    }
}

/// Free-function form of [`Penalty::value`].
pub fn penalty_value(spec: &RegularizerSpec, t: f64, lambda: f64) -> f64 {
    spec.value(t, lambda)
}

/// Free-function form of [`Penalty::threshold`].
pub fn scalar_threshold(spec: &RegularizerSpec, u: f64, v: f64, lambda: f64) -> Result<f64> {
    spec.threshold(u, v, lambda)
}

impl Penalty for RegularizerSpec {
    fn value(&self, t: f64, lambda: f64) -> f64 {
        let a = t.abs();
        let g = self.gamma;
        match self.kind {
            RegularizerKind::L1 => lambda * a,
            RegularizerKind::Mcp => {
                if a <= g * lambda {
                    lambda * a - a * a / (2.0 * g)
                } else {
                    0.5 * g * lambda * lambda
                }
            }
            RegularizerKind::Scad => {
                if a <= lambda {
                    lambda * a
                } else if a <= g * lambda {
                    (2.0 * g * lambda * a - a * a - lambda * lambda) / (2.0 * (g - 1.0))
                } else {
                    0.5 * lambda * lambda * (g + 1.0)
                }
            }
        }
    }

    fn derivative(&self, abs_t: f64, lambda: f64) -> f64 {
        let g = self.gamma;
        match self.kind {
            RegularizerKind::L1 => lambda,
            RegularizerKind::Mcp => (lambda - abs_t / g).max(0.0),
            RegularizerKind::Scad => {
                if abs_t <= lambda {
                    lambda
                } else {
                    (g * lambda - abs_t).max(0.0) / (g - 1.0)
                }
            }
        }
    }

    fn threshold(&self, u: f64, v: f64, lambda: f64) -> Result<f64> {
        if v.is_nan() || v <= 0.0 {
            return Err(Error::DegenerateCurvature {
                curvature: v,
                minimum: 0.0,
            });
        }
        if lambda == 0.0 {
            return Ok(u / v);
        }
        let floor = self.curvature_floor();
        if v <= floor {
            return Err(Error::DegenerateCurvature {
                curvature: v,
                minimum: floor,
            });
        }
        let a = u.abs();
        if a <= lambda {
            return Ok(0.0);
        }
        let g = self.gamma;
        let t = match self.kind {
            RegularizerKind::L1 => soft_threshold(u, lambda) / v,
            RegularizerKind::Mcp => {
                if a <= g * lambda * v {
                    soft_threshold(u, lambda) / (v - 1.0 / g)
                } else {
                    u / v
                }
            }
            RegularizerKind::Scad => {
                if a <= lambda * (1.0 + v) {
                    soft_threshold(u, lambda) / v
                } else if a <= g * lambda * v {
                    soft_threshold(u, g * lambda / (g - 1.0)) / (v - 1.0 / (g - 1.0))
                } else {
                    u / v
                }
            }
        };
        Ok(t)
    }

    fn curvature_floor(&self) -> f64 {
        match self.kind {
            RegularizerKind::L1 => 0.0,
            RegularizerKind::Mcp => 1.0 / self.gamma,
            RegularizerKind::Scad => 1.0 / (self.gamma - 1.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mcp(g: f64) -> RegularizerSpec {
        RegularizerSpec::mcp(g).unwrap()
    }

    fn scad(g: f64) -> RegularizerSpec {
        RegularizerSpec::scad(g).unwrap()
    }

    /// Composite Simpson quadrature of the penalty derivative over [0, t].
    fn integrate_derivative(spec: &RegularizerSpec, t: f64, lambda: f64) -> f64 {
        let m = 20_000;
        let h = t / m as f64;
        let f = |s: f64| spec.derivative(s, lambda);
        let mut acc = f(0.0) + f(t);
        for k in 1..m {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(k as f64 * h);
        }
        acc * h / 3.0
    }

    /// Grid scan on [-12, 12], golden-section refinement, then bisection on
    /// the sign of a central-difference slope.
    fn brute_force_min(spec: &RegularizerSpec, u: f64, v: f64, lambda: f64) -> f64 {
        let phi = |t: f64| 0.5 * v * t * t - u * t + spec.value(t, lambda);
        let (lo, hi, m) = (-12.0, 12.0, 24_000);
        let h = (hi - lo) / m as f64;
        let mut best = (0.0, phi(0.0));
        for k in 0..=m {
            let t = lo + k as f64 * h;
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
        let slope = |t: f64| (phi(t + 1e-6) - phi(t - 1e-6)) / 2e-6;
        let (mut a, mut b) = (a - 1e-5, b + 1e-5);
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

    #[test]
    fn invalid_gamma_rejected() {
        assert!(RegularizerSpec::mcp(1.0).is_err());
        assert!(RegularizerSpec::mcp(f64::NAN).is_err());
        assert!(RegularizerSpec::scad(2.0).is_err());
        assert!(RegularizerSpec::scad(f64::INFINITY).is_err());
        assert!(RegularizerSpec::mcp(1.25).is_ok());
    }

    #[test]
    fn default_gammas() {
        let m = RegularizerSpec::new(RegularizerKind::Mcp, None).unwrap();
        let s = RegularizerSpec::new(RegularizerKind::Scad, None).unwrap();
        assert_eq!(m.gamma(), Some(3.0));
        assert_eq!(s.gamma(), Some(3.7));
        assert_eq!(RegularizerSpec::l1().gamma(), None);
    }

    #[test]
    fn penalty_examples() {
        assert_eq!(penalty_value(&RegularizerSpec::l1(), 2.0, 0.5), 1.0);
        assert_eq!(penalty_value(&mcp(2.0), 0.0, 1.0), 0.0);

        let m = mcp(2.0);
        let quad = integrate_derivative(&m, 5.0, 1.0);
        assert!((quad - 1.0).abs() < 1e-6, "quadrature {quad}");
        assert!((penalty_value(&m, 5.0, 1.0) - quad).abs() < 1e-6);

        let s = scad(3.7);
        let quad = integrate_derivative(&s, 10.0, 1.0);
        assert!((quad - 2.35).abs() < 1e-6, "quadrature {quad}");
        assert!((penalty_value(&s, 10.0, 1.0) - 2.35).abs() < 1e-12);
    }

    #[test]
    fn threshold_examples() {
        let l1 = RegularizerSpec::l1();
        assert_eq!(scalar_threshold(&l1, 0.0, 1.0, 0.3).unwrap(), 0.0);

        let t = scalar_threshold(&l1, 2.0, 1.0, 0.5).unwrap();
        assert!((t - brute_force_min(&l1, 2.0, 1.0, 0.5)).abs() < 1e-8);
        assert!((t - 1.5).abs() < 1e-12);

        let m = mcp(3.0);
        let t = scalar_threshold(&m, 1.2, 1.0, 1.0).unwrap();
        assert!((t - 0.3).abs() < 1e-12);
        assert!((t - brute_force_min(&m, 1.2, 1.0, 1.0)).abs() < 1e-7);
        let t = scalar_threshold(&m, 4.0, 1.0, 1.0).unwrap();
        assert!((t - 4.0).abs() < 1e-12);

        for spec in [l1, m, scad(3.7)] {
            assert_eq!(scalar_threshold(&spec, 3.0, 2.0, 0.0).unwrap(), 1.5);
        }
    }

    #[test]
    fn tie_at_lambda_is_zero() {
        for spec in [RegularizerSpec::l1(), mcp(3.0), scad(3.7)] {
            assert_eq!(spec.threshold(0.7, 1.0, 0.7).unwrap(), 0.0);
            assert_eq!(spec.threshold(-0.7, 1.0, 0.7).unwrap(), 0.0);
        }
    }

    #[test]
    fn degenerate_curvature_reported() {
        let err = mcp(3.0).threshold(2.0, 0.3, 1.0).unwrap_err();
        assert!(matches!(err, Error::DegenerateCurvature { .. }));
        let err = scad(3.7).threshold(2.0, 1.0 / 2.7, 1.0).unwrap_err();
        assert!(matches!(err, Error::DegenerateCurvature { .. }));
        assert!(RegularizerSpec::l1().threshold(1.0, 0.0, 0.1).is_err());
    }

    fn arb_spec() -> impl Strategy<Value = RegularizerSpec> {
        prop_oneof![
            Just(RegularizerSpec::l1()),
            (1.05f64..8.0).prop_map(mcp),
            (2.05f64..8.0).prop_map(scad),
        ]
    }

    proptest! {
        #[test]
        fn penalty_symmetric_and_monotone(spec in arb_spec(), t in 0.0f64..10.0, dt in 0.0f64..2.0, lambda in 0.0f64..3.0) {
            prop_assert_eq!(spec.value(t, lambda), spec.value(-t, lambda));
            prop_assert!(spec.value(t + dt, lambda) >= spec.value(t, lambda) - 1e-12);
            prop_assert!(spec.value(t, lambda) >= 0.0);
        }

        #[test]
        fn zero_region(spec in arb_spec(), frac in -1.0f64..=1.0, v in 0.2f64..5.0, lambda in 0.0f64..3.0) {
            let v = v.max(spec.curvature_floor() * 1.01 + 1e-3);
            prop_assert_eq!(spec.threshold(frac * lambda, v, lambda).unwrap(), 0.0);
        }

        #[test]
        fn sign_preserved(spec in arb_spec(), u in -10.0f64..10.0, v in 0.2f64..5.0, lambda in 0.0f64..3.0) {
            let v = v.max(spec.curvature_floor() * 1.01 + 1e-3);
            let t = spec.threshold(u, v, lambda).unwrap();
            prop_assert!(t == 0.0 || t.signum() == u.signum());
        }

        #[test]
        fn local_optimality(spec in arb_spec(), u in -10.0f64..10.0, v in 0.2f64..5.0, lambda in 0.0f64..3.0) {
            let v = v.max(spec.curvature_floor() * 1.01 + 1e-3);
            let t = spec.threshold(u, v, lambda).unwrap();
            let phi = |s: f64| 0.5 * v * s * s - u * s + spec.value(s, lambda);
            prop_assert!(phi(t) <= phi(t + 1e-4) + 1e-12);
            prop_assert!(phi(t) <= phi(t - 1e-4) + 1e-12);
        }

        #[test]
        fn mcp_large_gamma_matches_l1(u in -10.0f64..10.0, v in 0.2f64..5.0, lambda in 0.0f64..3.0) {
            let a = mcp(1e8).threshold(u, v, lambda).unwrap();
            let b = RegularizerSpec::l1().threshold(u, v, lambda).unwrap();
            prop_assert!((a - b).abs() < 1e-6 * (1.0 + b.abs()));
        }

        #[test]
        fn continuous_in_u(spec in arb_spec(), u in -10.0f64..10.0, v in 0.5f64..5.0, lambda in 0.0f64..3.0) {
            let v = v.max(spec.curvature_floor() * 1.01 + 1e-3);
            let a = spec.threshold(u, v, lambda).unwrap();
            let b = spec.threshold(u + 1e-4, v, lambda).unwrap();
            prop_assert!((a - b).abs() <= 1e-2);
        }
    }

    #[test]
    fn oracle_agreement_sample() {
        let cases = [
            (mcp(1.25), 2.3, 1.0, 1.0),
            (mcp(3.0), -2.5, 0.9, 1.0),
            (scad(3.7), 1.9, 1.0, 1.0),
            (scad(3.7), 3.0, 1.0, 1.0),
            (scad(2.5), -4.0, 1.2, 1.3),
            (RegularizerSpec::l1(), -3.0, 0.4, 0.2),
        ];
        for (spec, u, v, lambda) in cases {
            let t = spec.threshold(u, v, lambda).unwrap();
            let oracle = brute_force_min(&spec, u, v, lambda);
            assert!((t - oracle).abs() < 1e-6, "{spec:?} u={u}: {t} vs {oracle}");
        }
    }
}
