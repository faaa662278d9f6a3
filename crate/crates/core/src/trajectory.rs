//! Constant-rate joint trajectories, singularity detection along a trace and
//! escape maneuvers planned from the escape analysis.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::escape::{analyze, Classification, EscapeAnalysis, EscapeOptions};
use crate::kinematics::{checked_jacobian, JacobianProvider};
use crate::singularity::{svd_decompose, DEFAULT_TOL_REL};

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
    /// `J(q) q̇`
    pub x_dot: Vec<f64>,
    /// `u_mᵀ ẋ` with `u_m` frozen for the whole trace.
    pub d_dot: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Relative rank threshold.
    pub sigma_tol: f64,
    /// `‖q̇_s‖` of a planned escape.
    pub qs_magnitude: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 0.1,
            sigma_tol: DEFAULT_TOL_REL,
            qs_magnitude: 1.0,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: "must be positive and finite",
            });
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "t_end",
                reason: "must be non-negative and finite",
            });
        }
        if !(self.sigma_tol > 0.0 && self.sigma_tol < 1.0) {
            return Err(Error::InvalidParameter {
                name: "sigma_tol",
                reason: "must lie in (0, 1)",
            });
        }
        if !(self.qs_magnitude >= 0.0 && self.qs_magnitude.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "qs_magnitude",
                reason: "must be non-negative and finite",
            });
        }
        Ok(())
    }

    /// Sample times `0, dt, …` up to and including `t_end`.
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        let steps = libm::floor(self.t_end / self.dt + 1e-9) as usize;
        (0..=steps).map(move |i| i as f64 * self.dt)
    }
}

/// `u_mᵀ J(q₀ + q̇ t) q̇`.
pub fn singular_rate_at<P: JacobianProvider + ?Sized>(
    provider: &P,
    q0: &[f64],
    qdot: &[f64],
    u_m: &DVector<f64>,
    t: f64,
) -> Result<f64> {
    let q: Vec<f64> = q0.iter().zip(qdot).map(|(a, b)| a + b * t).collect();
    let j = checked_jacobian(provider, &q)?;
    Ok(u_m.dot(&(j * DVector::from_column_slice(qdot))))
}

/// Samples the straight joint path `q(t) = q₀ + q̇ t`.
///
/// `direction` is the frozen singular direction to project on; when absent
/// the smallest-σ left singular vector at `q₀` is used.
pub fn integrate_constant_rate<P: JacobianProvider + ?Sized>(
    provider: &P,
    q0: &[f64],
    qdot: &[f64],
    cfg: &SimulationConfig,
    direction: Option<&DVector<f64>>,
) -> Result<Vec<TrajectorySample>> {
    cfg.validate()?;
    let n = provider.joint_count();
    let m = provider.task_dim();
    for (what, v) in [("q0", q0), ("qdot", qdot)] {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                what,
                expected: n,
                found: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what });
        }
    }
    let u_m = match direction {
        Some(u) if u.len() != m => {
            return Err(Error::DimensionMismatch {
                what: "singular direction",
                expected: m,
                found: u.len(),
            })
        }
        Some(u) => u.clone(),
        None => {
            let dec = svd_decompose(&checked_jacobian(provider, q0)?, cfg.sigma_tol)?;
            dec.u.column(m - 1).into_owned()
        }
    };

    let rate = DVector::from_column_slice(qdot);
    let mut out = Vec::new();
    for t in cfg.times() {
        let q: Vec<f64> = q0.iter().zip(qdot).map(|(a, b)| a + b * t).collect();
        let j = checked_jacobian(provider, &q)?;
        let x_dot = &j * &rate;
        let dec = svd_decompose(&j, cfg.sigma_tol)?;
        out.push(TrajectorySample {
            t,
            q,
            qdot: qdot.to_vec(),
            d_dot: u_m.dot(&x_dot),
            x_dot: x_dot.iter().copied().collect(),
            sigma_min: dec.sigma_min(),
            sigma_max: dec.sigma_max(),
        });
    }
    Ok(out)
}

/// Indices of local minima of `sigma_min` lying below
/// `sigma_tol · max σ₁` over the trace. A flat run reports its first index.
pub fn detect_singularities(trace: &[TrajectorySample], sigma_tol: f64) -> Vec<usize> {
    let Some(scale) = trace.iter().map(|s| s.sigma_max).reduce(f64::max) else {
        return Vec::new();
    };
    let threshold = sigma_tol * scale;
    let s: Vec<f64> = trace.iter().map(|x| x.sigma_min).collect();
    (0..s.len())
        .filter(|&i| s[i] < threshold && (i == 0 || s[i] < s[i - 1]) && (i + 1 == s.len() || s[i] <= s[i + 1]))
        .collect()
}

/// Trapezoidal running integral of `d_dot`; `d(0) = 0`.
pub fn singular_displacement(trace: &[TrajectorySample]) -> Vec<f64> {
    let mut out = Vec::with_capacity(trace.len());
    let mut acc = 0.0;
    for (i, s) in trace.iter().enumerate() {
        if i > 0 {
            let prev = &trace[i - 1];
            acc += 0.5 * (s.t - prev.t) * (s.d_dot + prev.d_dot);
        }
        out.push(acc);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanStatus {
    Ready,
    /// `A` vanishes: the planned rate is zero.
    NoFeasiblePath,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EscapePlan {
    pub qdot: DVector<f64>,
    pub qs_dot: DVector<f64>,
    pub classification: Classification,
    /// Predicted sign of `d̈` along `qdot`.
    pub ddot_sign: i8,
    pub status: PlanStatus,
    pub analysis: EscapeAnalysis,
}

/// Plans `q̇ = N q̇_s` with `‖q̇_s‖ = qs_magnitude` and `Ẏ = 0`.
///
/// For a matrix `A` the rate follows the eigenvector of largest `|λ|`.
pub fn escape_plan<P: JacobianProvider + ?Sized>(
    provider: &P,
    q_singular: &[f64],
    cfg: &SimulationConfig,
    pinned_s: Option<&[usize]>,
) -> Result<EscapePlan> {
    cfg.validate()?;
    let opts = EscapeOptions {
        tol_rel: cfg.sigma_tol,
        pinned_s: pinned_s.map(|s| s.to_vec()),
        ..EscapeOptions::default()
    };
    let analysis = analyze(provider, q_singular, &opts)?;
    let coef = &analysis.coefficients;
    let s = coef.a.nrows();
    if coef.classification == Classification::NoFeasiblePath {
        return Ok(EscapePlan {
            qdot: DVector::zeros(provider.joint_count()),
            qs_dot: DVector::zeros(s),
            classification: coef.classification,
            ddot_sign: 0,
            status: PlanStatus::NoFeasiblePath,
            analysis,
        });
    }

    let (direction, lambda) = dominant_eigenpair(&coef.a);
    let qs_dot = direction * cfg.qs_magnitude;
    let qdot = &analysis.partition.n * &qs_dot;
    let ddot_sign = match coef.classification {
        Classification::IndefiniteQuadratic => {
            if lambda > 0.0 {
                1
            } else {
                -1
            }
        }
        c => c.ddot_sign(),
    };
    Ok(EscapePlan {
        qdot,
        qs_dot,
        classification: coef.classification,
        ddot_sign,
        status: PlanStatus::Ready,
        analysis,
    })
}

/// Unit eigenvector of the largest-|λ| eigenvalue, largest entry positive.
fn dominant_eigenpair(a: &DMatrix<f64>) -> (DVector<f64>, f64) {
    if a.nrows() == 1 {
        return (DVector::from_element(1, 1.0), a[(0, 0)]);
    }
    let eig = a.clone().symmetric_eigen();
    let mut best = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i].abs() > eig.eigenvalues[best].abs() {
            best = i;
        }
    }
    let mut v = eig.eigenvectors.column(best).into_owned();
    let lead = v
        .iter()
        .copied()
        .fold(0.0_f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
    if lead < 0.0 {
        v.neg_mut();
    }
    (v, eig.eigenvalues[best])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::{BenchmarkJacobian, BenchmarkParams, EpsilonBranch};
    use alloc::vec;
    use core::f64::consts::FRAC_PI_2;

    fn arm(a2: f64, d4: f64) -> BenchmarkJacobian {
        BenchmarkJacobian::arm(BenchmarkParams::new(a2, d4).unwrap())
    }

    #[test]
    fn stationary_trace() {
        let cfg = SimulationConfig {
            dt: 0.01,
            t_end: 0.05,
            ..Default::default()
        };
        let q0 = [0.1, 0.2, 0.3];
        let trace = integrate_constant_rate(&arm(1.0, 1.0), &q0, &[0.0; 3], &cfg, None).unwrap();
        assert_eq!(trace.len(), 6);
        assert!(trace.iter().all(|s| s.q == q0 && s.sigma_min == trace[0].sigma_min));
    }

    #[test]
    fn zero_duration_is_one_sample() {
        let cfg = SimulationConfig {
            dt: 0.01,
            t_end: 0.0,
            ..Default::default()
        };
        let trace = integrate_constant_rate(&arm(1.0, 1.0), &[0.0; 3], &[1.0; 3], &cfg, None).unwrap();
        assert_eq!(trace.len(), 1);
        assert_eq!(trace[0].t, 0.0);
    }

    #[test]
    fn minimum_sigma_at_crossing() {
        let cfg = SimulationConfig {
            dt: 0.01,
            t_end: 0.6,
            ..Default::default()
        };
        let q0 = [0.0, 0.0, FRAC_PI_2 - 0.3];
        let trace = integrate_constant_rate(&arm(1.0, 1.0), &q0, &[0.0, 0.0, 1.0], &cfg, None).unwrap();
        let argmin = (0..trace.len())
            .min_by(|&a, &b| trace[a].sigma_min.total_cmp(&trace[b].sigma_min))
            .unwrap();
        assert_eq!(argmin, 30);
        assert_eq!(detect_singularities(&trace, 0.05), vec![30]);
    }

    #[test]
    fn detection_edge_cases() {
        assert!(detect_singularities(&[], 0.1).is_empty());
        let cfg = SimulationConfig {
            dt: 0.01,
            t_end: 0.2,
            ..Default::default()
        };
        // θ3 stays near 0 where σ3 ≈ 0.618
        let trace = integrate_constant_rate(&arm(1.0, 1.0), &[0.0; 3], &[0.0, 0.0, 0.5], &cfg, None).unwrap();
        assert!(trace.iter().all(|s| s.sigma_min >= 0.3));
        assert!(detect_singularities(&trace, 0.1).is_empty());
    }

    #[test]
    fn plan_at_positive_branch() {
        let q = [0.0, 0.0, EpsilonBranch::new(0).theta3()];
        let plan = escape_plan(&arm(1.0, 1.0), &q, &SimulationConfig::default(), Some(&[1])).unwrap();
        assert_eq!(plan.classification, Classification::EscapeOppositeUm);
        assert_eq!(plan.ddot_sign, -1);
        assert_eq!(plan.status, PlanStatus::Ready);
        assert!((plan.qdot[1] - 1.0).abs() < 1e-12);
        assert!((plan.qdot[2] + 2.0).abs() < 1e-9);
    }

    #[test]
    fn plan_with_no_path() {
        let q = [0.0, 0.0, EpsilonBranch::new(1).theta3()];
        let plan = escape_plan(&arm(1.0, 1.0), &q, &SimulationConfig::default(), None).unwrap();
        assert_eq!(plan.classification, Classification::NoFeasiblePath);
        assert_eq!(plan.status, PlanStatus::NoFeasiblePath);
        assert_eq!(plan.ddot_sign, 0);
        assert_eq!(plan.qdot, DVector::zeros(3));
    }

    #[test]
    fn plan_requires_singularity() {
        let err = escape_plan(&arm(1.0, 1.0), &[0.0; 3], &SimulationConfig::default(), None).unwrap_err();
        assert!(matches!(err, Error::NotSimpleSingularity { rank: 3, .. }));
    }

    #[test]
    fn displacement_trapezoid() {
        let mk = |t: f64, d: f64| TrajectorySample {
            t,
            q: vec![],
            qdot: vec![],
            x_dot: vec![],
            d_dot: d,
            sigma_min: 0.0,
            sigma_max: 1.0,
        };
        let d = singular_displacement(&[mk(0.0, 0.0), mk(1.0, 2.0), mk(2.0, 2.0)]);
        assert_eq!(d, vec![0.0, 1.0, 3.0]);
    }

    #[test]
    fn config_validation() {
        let bad = SimulationConfig {
            dt: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SimulationConfig {
            sigma_tol: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!(SimulationConfig::default().times().count(), 101);
    }
}
