//! Forward kinematics and the geometric Jacobian for classic DH chains.

use alloc::vec::Vec;
use libm::{cos, sin};
use nalgebra::{DMatrix, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::robot::{DhJoint, JointKind, RobotModel};

/// Rigid transform: `x ↦ rotation · x + translation`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn compose(&self, rhs: &Pose) -> Pose {
        Pose {
            rotation: self.rotation * rhs.rotation,
            translation: self.rotation * rhs.translation + self.translation,
        }
    }

    /// `‖RᵀR − I‖_max` together with `|det R − 1|`, whichever is larger.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.rotation.transpose() * self.rotation - Matrix3::identity();
        let off = gram.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        off.max((self.rotation.determinant() - 1.0).abs())
    }
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

/// Cumulative poses from the base: entry 0 is the base frame, entry `i` the
/// frame after joint `i`, the last entry the end-effector.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameChain {
    pub frames: Vec<Pose>,
}

impl FrameChain {
    pub fn end_effector(&self) -> &Pose {
        self.frames.last().expect("frame chain always holds the base frame")
    }
}

/// Supplies `J(q)` (m×n) for the analysis pipeline.
///
/// Implementations must be pure: the same `q` always yields the same matrix,
/// and concurrent calls are allowed.
pub trait JacobianProvider {
    fn joint_count(&self) -> usize;
    fn task_dim(&self) -> usize;
    fn jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>>;
}

impl<P: JacobianProvider + ?Sized> JacobianProvider for &P {
    fn joint_count(&self) -> usize {
        (**self).joint_count()
    }
    fn task_dim(&self) -> usize {
        (**self).task_dim()
    }
    fn jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        (**self).jacobian(q)
    }
}

impl JacobianProvider for RobotModel {
    fn joint_count(&self) -> usize {
        RobotModel::joint_count(self)
    }
    fn task_dim(&self) -> usize {
        self.task_dim
    }
    fn jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        numeric_jacobian(self, q)
    }
}

/// Calls the provider and checks the returned matrix against its contract.
pub fn checked_jacobian<P: JacobianProvider + ?Sized>(provider: &P, q: &[f64]) -> Result<DMatrix<f64>> {
    let n = provider.joint_count();
    if q.len() != n {
        return Err(Error::DimensionMismatch {
            what: "joint vector",
            expected: n,
            found: q.len(),
        });
    }
    let j = provider.jacobian(q)?;
    if j.nrows() != provider.task_dim() {
        return Err(Error::DimensionMismatch {
            what: "jacobian rows",
            expected: provider.task_dim(),
            found: j.nrows(),
        });
    }
    if j.ncols() != n {
        return Err(Error::DimensionMismatch {
            what: "jacobian columns",
            expected: n,
            found: j.ncols(),
        });
    }
    if !crate::linalg::all_finite(&j) {
        return Err(Error::NonFinite { what: "jacobian" });
    }
    Ok(j)
}

/// Link transform `Rz(θ) · Tz(d) · Tx(a) · Rx(α)`.
pub fn dh_transform(joint: &DhJoint, q: f64) -> Pose {
    let (theta, d) = joint.theta_d(q);
    let (st, ct) = (sin(theta), cos(theta));
    let (sa, ca) = (sin(joint.alpha), cos(joint.alpha));
    Pose {
        rotation: Matrix3::new(
            ct,
            -st * ca,
            st * sa, //
            st,
            ct * ca,
            -ct * sa, //
            0.0,
            sa,
            ca,
        ),
        translation: Vector3::new(joint.a * ct, joint.a * st, d),
    }
}

pub fn forward_kinematics(model: &RobotModel, q: &[f64]) -> Result<FrameChain> {
    check_q(model, q)?;
    let mut frames = Vec::with_capacity(q.len() + 1);
    let mut current = Pose::identity();
    frames.push(current);
    for (joint, &qi) in model.joints.iter().zip(q) {
        current = current.compose(&dh_transform(joint, qi));
        frames.push(current);
    }
    Ok(FrameChain { frames })
}

/// Geometric Jacobian in the base frame. Rows are `(v; ω)` for `m = 6` and
/// `v` only for `m = 3`.
pub fn numeric_jacobian(model: &RobotModel, q: &[f64]) -> Result<DMatrix<f64>> {
    let chain = forward_kinematics(model, q)?;
    let n = model.joint_count();
    let m = model.task_dim;
    if m != 3 && m != 6 {
        return Err(Error::InvalidParameter {
            name: "task_dim",
            reason: "m must be 3 or 6",
        });
    }
    let p_end = chain.end_effector().translation;
    let mut j = DMatrix::zeros(m, n);
    for (i, joint) in model.joints.iter().enumerate() {
        // joint i moves along / about the z axis of the frame preceding it
        let frame = &chain.frames[i];
        let z = frame.rotation.column(2).into_owned();
        let (linear, angular) = match joint.kind {
            JointKind::Revolute => (z.cross(&(p_end - frame.translation)), z),
            JointKind::Prismatic => (z, Vector3::zeros()),
        };
        for r in 0..3 {
            j[(r, i)] = linear[r];
            if m == 6 {
                j[(r + 3, i)] = angular[r];
            }
        }
    }
    Ok(j)
}

fn check_q(model: &RobotModel, q: &[f64]) -> Result<()> {
    if q.len() != model.joint_count() {
        return Err(Error::DimensionMismatch {
            what: "joint vector",
            expected: model.joint_count(),
            found: q.len(),
        });
    }
    if q.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "joint vector" });
    }
    Ok(())
}
