//! Singularity analysis and escape-direction classification for serial
//! manipulators.
//!
//! The crate is `no_std` (it needs `alloc`). The pipeline is:
//!
//! 1. [`kinematics`] (or a closed-form provider from [`benchmark`]) supplies
//!    the Jacobian `J(q)` through the [`JacobianProvider`] trait.
//! 2. [`singularity`] factors `J = U Σ Vᵀ`, finds the numerical rank, the
//!    singular direction `u_m`, and splits `Uᵀ J` into the non-singular rows
//!    `K` and the singular row `L`.
//! 3. [`escape`] partitions `K`, differentiates `L` and reduces the singular
//!    acceleration to `q̇_sᵀ A q̇_s + B q̇_s + C`; the sign of `A` tells which
//!    way along `u_m` the end-effector can leave the singularity.
//! 4. [`trajectory`] integrates constant-rate joint paths to demonstrate the
//!    predicted escape.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod benchmark;
pub mod error;
pub mod escape;
pub mod kinematics;
pub mod linalg;
pub mod robot;
pub mod singularity;
pub mod trajectory;

pub use error::{Error, Result};
pub use escape::{Classification, EscapeAnalysis, EscapeCoefficients, EscapeOptions, Partition};
pub use kinematics::{FrameChain, JacobianProvider, Pose};
pub use robot::{DhJoint, JointKind, JointState, RobotModel, ValidationScope, Violation};
pub use singularity::{SingularFrame, SvdResult, DEFAULT_TOL_REL};

pub use nalgebra::{DMatrix, DVector};
