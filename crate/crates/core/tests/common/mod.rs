#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use singescape_core::benchmark::{BenchmarkJacobian, BenchmarkParams, EpsilonBranch};
use singescape_core::DMatrix;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Random benchmark configuration on the singular locus `θ3 = kπ + π/2`,
/// with the wrist kept away from `sin q5 = 0`.
pub struct LocusCase {
    pub params: BenchmarkParams,
    pub branch: EpsilonBranch,
    pub q: [f64; 6],
}

impl LocusCase {
    pub fn random(rng: &mut StdRng) -> Self {
        let params = BenchmarkParams::new(rng.gen_range(0.3..2.5), rng.gen_range(0.3..2.5)).unwrap();
        let branch = EpsilonBranch::new(rng.gen_range(-2..=2));
        let q5 = rng.gen_range(0.3..(std::f64::consts::PI - 0.3)) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let q = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-3.0..3.0),
            branch.theta3(),
            rng.gen_range(-3.0..3.0),
            q5,
            rng.gen_range(-3.0..3.0),
        ];
        Self { params, branch, q }
    }

    pub fn full(&self) -> BenchmarkJacobian {
        BenchmarkJacobian::full(self.params)
    }

    pub fn arm(&self) -> BenchmarkJacobian {
        BenchmarkJacobian::arm(self.params)
    }

    pub fn is_degenerate(&self) -> bool {
        (self.params.d4 + self.params.a2 * self.branch.epsilon()).abs() < 1e-3
    }
}

/// Grid of the acceptance criteria: a2, d4 ∈ {0.5, 1, 2}, ε = ±1.
pub fn acceptance_grid() -> Vec<(BenchmarkParams, EpsilonBranch)> {
    let mut out = Vec::new();
    for &a2 in &[0.5, 1.0, 2.0] {
        for &d4 in &[0.5, 1.0, 2.0] {
            for &eps in &[-1i8, 1] {
                out.push((
                    BenchmarkParams::new(a2, d4).unwrap(),
                    EpsilonBranch::from_epsilon(eps).unwrap(),
                ));
            }
        }
    }
    out
}

pub fn is_degenerate(p: &BenchmarkParams, b: EpsilonBranch) -> bool {
    p.d4 == p.a2 && b.epsilon() < 0.0
}
