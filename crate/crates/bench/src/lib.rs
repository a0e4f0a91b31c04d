//! Shared fixtures for the criterion benchmarks.

use pathwise::{generate_synthetic, Dataset, Family, SyntheticSpec};

/// AR(1) design with 10 nonzero coefficients (fewer if `d < 10`).
pub fn problem(n: usize, d: usize, rho: f64, family: Family, seed: u64) -> Dataset {
    let spec = SyntheticSpec { n, d, sparsity: 10.min(d), rho, family, noise_sd: 1.0, seed };
    generate_synthetic(&spec).expect("valid synthetic spec").0
}

/// Deterministic `(u, v, λ)` triples for threshold micro-benchmarks, with
/// `v` kept above every nonconvex curvature floor used in the benches.
pub fn threshold_inputs(count: usize) -> Vec<(f64, f64, f64)> {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    (0..count).map(|_| (20.0 * next() - 10.0, 1.0 + 4.0 * next(), 3.0 * next())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_deterministic() {
        let a = problem(20, 30, 0.5, Family::Gaussian, 3);
        let b = problem(20, 30, 0.5, Family::Gaussian, 3);
        assert_eq!(a.y(), b.y());
        assert_eq!(threshold_inputs(5), threshold_inputs(5));
        assert!(threshold_inputs(100).iter().all(|&(_, v, _)| v >= 1.0));
    }
}
