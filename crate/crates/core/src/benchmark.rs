//! Closed forms for the six-joint case-study robot (one vertical prismatic
//! joint, five revolute joints).
//!
//! The positional arm (joints 1–3) decouples from the wrist because the
//! upper-right Jacobian block is identically zero. Its only singular locus
//! is `cos θ3 = 0`, i.e. `θ3 = kπ + π/2`, where `ε = sin θ3 = ±1`. There the
//! escape coefficient is
//!
//! ```text
//! h = −(d4 + a2 ε) / (a2 d4 ε),   A = (a2 ε)² h
//! ```
//!
//! These functions are independent of the numeric pipeline and serve as its
//! oracle.

use core::f64::consts::{FRAC_PI_2, PI};
use libm::{cos, sin, sqrt};
use nalgebra::{DMatrix, Matrix3, Matrix6};

use crate::error::{Error, Result};
use crate::escape::Classification;
use crate::kinematics::JacobianProvider;
use crate::robot::{JointKind, RobotModel};

/// Zero band for the closed-form `A`.
pub const DEFAULT_ESCAPE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchmarkParams {
    pub a2: f64,
    pub d4: f64,
}

impl BenchmarkParams {
    pub fn new(a2: f64, d4: f64) -> Result<Self> {
        if !(a2.is_finite() && a2 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "a2",
                reason: "must be positive and finite",
            });
        }
        if !(d4.is_finite() && d4 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "d4",
                reason: "must be positive and finite",
            });
        }
        Ok(Self { a2, d4 })
    }

    /// Recovers `(a2, d4)` from a model with the case-study structure
    /// (any `a1`, `d1`, zero offsets, the fixed twist angles).
    pub fn recognize(model: &RobotModel) -> Option<Self> {
        if model.joints.len() != 6 || model.task_dim != 6 {
            return None;
        }
        let right = 90f64.to_radians();
        let alphas = [0.0, 0.0, right, -right, right, 0.0];
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12;
        for (i, joint) in model.joints.iter().enumerate() {
            let kind = if i == 0 {
                JointKind::Prismatic
            } else {
                JointKind::Revolute
            };
            if joint.kind != kind || !close(joint.alpha, alphas[i]) || joint.theta_offset != 0.0 {
                return None;
            }
            if i >= 2 && joint.a != 0.0 {
                return None;
            }
            if i >= 1 && i != 3 && joint.d != 0.0 {
                return None;
            }
        }
        Self::new(model.joints[1].a, model.joints[3].d).ok()
    }
}

/// A singular branch `θ3 = kπ + π/2`; `ε = +1` iff `k` is even.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EpsilonBranch {
    pub k: i64,
}

impl EpsilonBranch {
    pub fn new(k: i64) -> Self {
        Self { k }
    }

    /// Smallest non-negative `k` with the requested sign.
    pub fn from_epsilon(epsilon: i8) -> Result<Self> {
        match epsilon {
            1 => Ok(Self { k: 0 }),
            -1 => Ok(Self { k: 1 }),
            _ => Err(Error::InvalidParameter {
                name: "epsilon",
                reason: "must be +1 or -1",
            }),
        }
    }

    /// Branch whose singular angle is nearest to `theta3`.
    pub fn nearest(theta3: f64) -> Self {
        Self {
            k: libm::round((theta3 - FRAC_PI_2) / PI) as i64,
        }
    }

    pub fn epsilon(self) -> f64 {
        if self.k.rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn theta3(self) -> f64 {
        self.k as f64 * PI + FRAC_PI_2
    }
}

/// Upper-left (positional, joints 1–3) block.
pub fn closed_form_j11(p: &BenchmarkParams, theta3: f64) -> Matrix3<f64> {
    let (s3, c3) = (sin(theta3), cos(theta3));
    Matrix3::new(
        0.0,
        p.d4 + p.a2 * s3,
        p.d4, //
        1.0,
        0.0,
        0.0, //
        0.0,
        -p.a2 * c3,
        0.0,
    )
}

/// Lower-right (wrist) block.
pub fn closed_form_j22(q4: f64, q5: f64) -> Matrix3<f64> {
    let (s4, c4) = (sin(q4), cos(q4));
    let (s5, c5) = (sin(q5), cos(q5));
    Matrix3::new(
        0.0,
        -s4,
        c4 * s5, //
        0.0,
        c4,
        s4 * s5, //
        1.0,
        0.0,
        c5,
    )
}

/// Lower-left block; constant.
pub fn closed_form_j21() -> Matrix3<f64> {
    Matrix3::new(0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0)
}

/// `[[J11, 0], [J21, J22]]` at `q = (d1, θ2, …, θ6)`.
pub fn closed_form_jacobian(p: &BenchmarkParams, q: &[f64; 6]) -> Matrix6<f64> {
    let mut j = Matrix6::zeros();
    j.fixed_view_mut::<3, 3>(0, 0).copy_from(&closed_form_j11(p, q[2]));
    j.fixed_view_mut::<3, 3>(3, 0).copy_from(&closed_form_j21());
    j.fixed_view_mut::<3, 3>(3, 3).copy_from(&closed_form_j22(q[3], q[4]));
    j
}

/// Singular values of `J11`, descending.
///
/// `J11 J11ᵀ` has the eigenvalue 1 and the two roots of
/// `λ² − T λ + D` with `T = (d4 + a2 S3)² + d4² + a2² C3²` and
/// `D = (a2 d4 C3)²`. The small root is formed as `D / λ₊` to avoid
/// cancellation.
pub fn singular_values_first3(p: &BenchmarkParams, theta3: f64) -> [f64; 3] {
    let (s3, c3) = (sin(theta3), cos(theta3));
    let t = sq(p.d4 + p.a2 * s3) + sq(p.d4) + sq(p.a2 * c3);
    let d = sq(p.a2 * p.d4 * c3);
    let disc = (t * t - 4.0 * d).max(0.0);
    let big = 0.5 * (t + sqrt(disc));
    let small = if big > 0.0 { d / big } else { 0.0 };
    let mut sv = [sqrt(big), 1.0, sqrt(small)];
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

fn sq(x: f64) -> f64 {
    x * x
}

/// `J11` on the singular branch: third row zero.
pub fn singular_j11(p: &BenchmarkParams, eps: EpsilonBranch) -> Matrix3<f64> {
    Matrix3::new(0.0, p.d4 + p.a2 * eps.epsilon(), p.d4, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0)
}

/// `H[i][j] = ∂L_j/∂q_i` for `L = (0, −a2 C3, 0)`: the only nonzero entry is
/// `∂L_2/∂q_3 = a2 S3` at (row 3, column 2).
pub fn closed_form_theta_l(p: &BenchmarkParams, theta3: f64) -> Matrix3<f64> {
    let mut h = Matrix3::zeros();
    h[(2, 1)] = p.a2 * sin(theta3);
    h
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormEscape {
    pub a: f64,
    pub h: f64,
    pub classification: Classification,
}

pub fn closed_form_escape(p: &BenchmarkParams, eps: EpsilonBranch) -> ClosedFormEscape {
    closed_form_escape_with_tol(p, eps, DEFAULT_ESCAPE_TOL)
}

pub fn closed_form_escape_with_tol(p: &BenchmarkParams, eps: EpsilonBranch, tol: f64) -> ClosedFormEscape {
    let e = eps.epsilon();
    let h = -(p.d4 + p.a2 * e) / (p.a2 * p.d4 * e);
    let a = sq(p.a2 * e) * h;
    let classification = if a.abs() <= tol {
        Classification::NoFeasiblePath
    } else if h > 0.0 {
        Classification::EscapeAlongUm
    } else {
        Classification::EscapeOppositeUm
    };
    ClosedFormEscape { a, h, classification }
}

/// Closed-form [`JacobianProvider`]: the full 6×6 matrix, or only the
/// positional arm block (`J11`, 3×3 over joints 1–3).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchmarkJacobian {
    pub params: BenchmarkParams,
    pub arm_only: bool,
}

impl BenchmarkJacobian {
    pub fn full(params: BenchmarkParams) -> Self {
        Self {
            params,
            arm_only: false,
        }
    }

    pub fn arm(params: BenchmarkParams) -> Self {
        Self { params, arm_only: true }
    }
}

impl JacobianProvider for BenchmarkJacobian {
    fn joint_count(&self) -> usize {
        if self.arm_only {
            3
        } else {
            6
        }
    }

    fn task_dim(&self) -> usize {
        self.joint_count()
    }

    fn jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.joint_count();
        if q.len() != n {
            return Err(Error::DimensionMismatch {
                what: "joint vector",
                expected: n,
                found: q.len(),
            });
        }
        if self.arm_only {
            let j = closed_form_j11(&self.params, q[2]);
            Ok(DMatrix::from_iterator(3, 3, j.iter().copied()))
        } else {
            let mut full = [0.0; 6];
            full.copy_from_slice(q);
            let j = closed_form_jacobian(&self.params, &full);
            Ok(DMatrix::from_iterator(6, 6, j.iter().copied()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robot::benchmark_model;

    fn p(a2: f64, d4: f64) -> BenchmarkParams {
        BenchmarkParams::new(a2, d4).unwrap()
    }

    #[test]
    fn j12_is_zero() {
        let j = closed_form_jacobian(&p(1.0, 1.0), &[0.3, 1.1, -0.4, 2.0, 0.7, -1.3]);
        assert_eq!(j.fixed_view::<3, 3>(0, 3).into_owned(), Matrix3::zeros());
    }

    #[test]
    fn j11_at_zero() {
        let j = closed_form_j11(&p(1.0, 1.0), 0.0);
        assert_eq!(j, Matrix3::new(0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, -1.0, 0.0));
    }

    #[test]
    fn j22_at_zero() {
        let j = closed_form_j22(0.0, 0.0);
        assert_eq!(j, Matrix3::new(0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0));
    }

    #[test]
    fn singular_values_at_branch() {
        let sv = singular_values_first3(&p(1.0, 1.0), FRAC_PI_2);
        assert!((sv[0] - sqrt(5.0)).abs() < 1e-15);
        assert_eq!(sv[1], 1.0);
        assert!(sv[2] < 1e-15);
    }

    #[test]
    fn singular_values_at_zero() {
        // T = 3, D = 1
        let sv = singular_values_first3(&p(1.0, 1.0), 0.0);
        assert!((sv[0] * sv[0] - (3.0 + sqrt(5.0)) / 2.0).abs() < 1e-14);
        assert!((sv[2] * sv[2] - (3.0 - sqrt(5.0)) / 2.0).abs() < 1e-14);
        assert!((sv[0] * sv[0] - 2.618).abs() < 1e-3);
        assert!((sv[2] * sv[2] - 0.382).abs() < 1e-3);
    }

    #[test]
    fn first_two_positive_on_locus() {
        for &(a2, d4) in &[(0.3, 2.0), (2.0, 0.3), (1.0, 1.0)] {
            for k in -2..3 {
                let sv = singular_values_first3(&p(a2, d4), EpsilonBranch::new(k).theta3());
                assert!(sv[0] > 0.0 && sv[1] > 0.0);
                assert!(sv[2] < 1e-15);
            }
        }
    }

    #[test]
    fn singular_block() {
        let plus = singular_j11(&p(1.0, 1.0), EpsilonBranch::new(0));
        assert_eq!(plus, Matrix3::new(0.0, 2.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0));
        let minus = singular_j11(&p(1.0, 1.0), EpsilonBranch::new(1));
        assert_eq!(minus, Matrix3::new(0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(minus.row(2).into_owned(), nalgebra::RowVector3::zeros());
    }

    #[test]
    fn theta_l_entry() {
        assert!((closed_form_theta_l(&p(1.0, 1.0), FRAC_PI_2)[(2, 1)] - 1.0).abs() < 1e-15);
        assert!((closed_form_theta_l(&p(2.0, 1.0), -FRAC_PI_2)[(2, 1)] + 2.0).abs() < 1e-15);
        assert_eq!(closed_form_theta_l(&p(1.0, 1.0), 0.0), Matrix3::zeros());
    }

    #[test]
    fn escape_cases() {
        let e = closed_form_escape(&p(1.0, 1.0), EpsilonBranch::from_epsilon(-1).unwrap());
        assert_eq!(e.a, 0.0);
        assert_eq!(e.classification, Classification::NoFeasiblePath);

        let e = closed_form_escape(&p(1.0, 2.0), EpsilonBranch::from_epsilon(1).unwrap());
        assert_eq!(e.h, -1.5);
        assert_eq!(e.a, -1.5);
        assert_eq!(e.classification, Classification::EscapeOppositeUm);

        let e = closed_form_escape(&p(0.5, 1.0), EpsilonBranch::from_epsilon(-1).unwrap());
        assert_eq!(e.h, 1.0);
        assert_eq!(e.a, 0.25);
        assert_eq!(e.classification, Classification::EscapeAlongUm);
    }

    #[test]
    fn epsilon_parity() {
        assert_eq!(EpsilonBranch::new(0).epsilon(), 1.0);
        assert_eq!(EpsilonBranch::new(3).epsilon(), -1.0);
        assert_eq!(EpsilonBranch::new(-1).epsilon(), -1.0);
        assert_eq!(EpsilonBranch::new(-2).epsilon(), 1.0);
        assert_eq!(EpsilonBranch::nearest(3.0 * FRAC_PI_2 + 0.1).k, 1);
        assert!(EpsilonBranch::from_epsilon(0).is_err());
    }

    #[test]
    fn recognizes_case_study_model() {
        let model = benchmark_model(0.5, 2.0).unwrap();
        assert_eq!(BenchmarkParams::recognize(&model), Some(p(0.5, 2.0)));
        let mut other = model.clone();
        other.joints[4].alpha = 0.0;
        assert_eq!(BenchmarkParams::recognize(&other), None);
    }

    #[test]
    fn provider_shapes() {
        let arm = BenchmarkJacobian::arm(p(1.0, 1.0));
        assert_eq!(arm.jacobian(&[0.0; 3]).unwrap().shape(), (3, 3));
        assert!(arm.jacobian(&[0.0; 6]).is_err());
        let full = BenchmarkJacobian::full(p(1.0, 1.0));
        let j = full.jacobian(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(j[(0, 1)], 1.0);
        assert_eq!(j[(5, 3)], 1.0);
    }

    #[test]
    fn params_validation() {
        assert!(BenchmarkParams::new(0.0, 1.0).is_err());
        assert!(BenchmarkParams::new(1.0, f64::INFINITY).is_err());
    }
}
