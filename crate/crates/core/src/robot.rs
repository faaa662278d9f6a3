//! Denavit-Hartenberg manipulator descriptions.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JointKind {
    Revolute,
    Prismatic,
}

impl JointKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Revolute => "revolute",
            Self::Prismatic => "prismatic",
        }
    }
}

impl core::str::FromStr for JointKind {
    type Err = ();

    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        match s {
            "revolute" => Ok(Self::Revolute),
            "prismatic" => Ok(Self::Prismatic),
            _ => Err(()),
        }
    }
}

/// One link of a classic (distal) DH chain. Angles are in radians, lengths
/// in meters. The joint variable adds to `theta_offset` for revolute joints
/// and to `d` for prismatic joints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DhJoint {
    pub kind: JointKind,
    pub alpha: f64,
    pub a: f64,
    pub d: f64,
    pub theta_offset: f64,
}

impl DhJoint {
    pub fn revolute(alpha: f64, a: f64, d: f64, theta_offset: f64) -> Self {
        Self {
            kind: JointKind::Revolute,
            alpha,
            a,
            d,
            theta_offset,
        }
    }

    pub fn prismatic(alpha: f64, a: f64, d: f64, theta_offset: f64) -> Self {
        Self {
            kind: JointKind::Prismatic,
            alpha,
            a,
            d,
            theta_offset,
        }
    }

    /// Effective `(theta, d)` for joint value `q`.
    pub fn theta_d(&self, q: f64) -> (f64, f64) {
        match self.kind {
            JointKind::Revolute => (self.theta_offset + q, self.d),
            JointKind::Prismatic => (self.theta_offset, self.d + q),
        }
    }
}

/// A serial manipulator: `n = joints.len()` joints driving an `m`-dimensional
/// task space (`m = 6` for a full twist, `m = 3` for position only).
#[derive(Clone, Debug, PartialEq)]
pub struct RobotModel {
    pub name: String,
    pub task_dim: usize,
    pub joints: Vec<DhJoint>,
}

impl RobotModel {
    /// Builds a model and rejects it if any kinematic invariant is broken.
    pub fn new(name: impl Into<String>, task_dim: usize, joints: Vec<DhJoint>) -> Result<Self> {
        let model = Self {
            name: name.into(),
            task_dim,
            joints,
        };
        let violations = validate_model(&model, ValidationScope::Kinematics);
        if violations.is_empty() {
            Ok(model)
        } else {
            Err(Error::InvalidModel(violations))
        }
    }

    pub fn joint_count(&self) -> usize {
        self.joints.len()
    }
}

/// Which analyses the model is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValidationScope {
    /// Forward kinematics and Jacobians.
    Kinematics,
    /// Additionally the scalar-`q̇_s` escape analysis, which needs `n = m`.
    EscapeAnalysis,
}

/// A broken model invariant. `joint` is `None` for model-level fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub joint: Option<usize>,
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.joint {
            Some(j) => write!(f, "joint {j}, field `{}`: {}", self.field, self.message),
            None => write!(f, "field `{}`: {}", self.field, self.message),
        }
    }
}

pub fn validate_model(model: &RobotModel, scope: ValidationScope) -> Vec<Violation> {
    let mut out = Vec::new();
    if model.name.trim().is_empty() {
        out.push(Violation {
            joint: None,
            field: "name",
            message: "name must not be empty".to_string(),
        });
    }
    if model.joints.is_empty() {
        out.push(Violation {
            joint: None,
            field: "joints",
            message: "empty joint list".to_string(),
        });
    }
    if model.task_dim != 3 && model.task_dim != 6 {
        out.push(Violation {
            joint: None,
            field: "task_dim",
            message: "m must be 3 or 6".to_string(),
        });
    }
    for (i, joint) in model.joints.iter().enumerate() {
        for (field, value) in [
            ("alpha", joint.alpha),
            ("a", joint.a),
            ("d", joint.d),
            ("theta_offset", joint.theta_offset),
        ] {
            if !value.is_finite() {
                out.push(Violation {
                    joint: Some(i),
                    field,
                    message: format!("non-finite field ({value})"),
                });
            }
        }
    }
    if scope == ValidationScope::EscapeAnalysis && model.joints.len() != model.task_dim {
        out.push(Violation {
            joint: None,
            field: "joints",
            message: format!(
                "escape analysis requires n = m (n = {}, m = {})",
                model.joints.len(),
                model.task_dim
            ),
        });
    }
    out
}

/// Joint positions and rates of an `n`-joint robot.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
}

impl JointState {
    pub fn new(model: &RobotModel, q: Vec<f64>, qdot: Vec<f64>) -> Result<Self> {
        let n = model.joint_count();
        if q.len() != n {
            return Err(Error::DimensionMismatch {
                what: "joint state q",
                expected: n,
                found: q.len(),
            });
        }
        if qdot.len() != n {
            return Err(Error::DimensionMismatch {
                what: "joint state qdot",
                expected: n,
                found: qdot.len(),
            });
        }
        if q.iter().chain(&qdot).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "joint state" });
        }
        Ok(Self { q, qdot })
    }

    pub fn at_rest(model: &RobotModel) -> Self {
        let n = model.joint_count();
        Self {
            q: vec![0.0; n],
            qdot: vec![0.0; n],
        }
    }
}

/// Name given to models built by [`benchmark_model`].
pub const BENCHMARK_NAME: &str = "six-dof-benchmark";

/// The six-joint case-study robot: a vertical prismatic joint followed by
/// five revolute joints, parameterised by the link length `a2` and the
/// offset `d4`. `a1` and `d1` are zero.
pub fn benchmark_model(a2: f64, d4: f64) -> Result<RobotModel> {
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
    let right = 90f64.to_radians();
    RobotModel::new(
        BENCHMARK_NAME,
        6,
        vec![
            DhJoint::prismatic(0.0, 0.0, 0.0, 0.0),
            DhJoint::revolute(0.0, a2, 0.0, 0.0),
            DhJoint::revolute(right, 0.0, 0.0, 0.0),
            DhJoint::revolute(-right, 0.0, d4, 0.0),
            DhJoint::revolute(right, 0.0, 0.0, 0.0),
            DhJoint::revolute(0.0, 0.0, 0.0, 0.0),
        ],
    )
}
