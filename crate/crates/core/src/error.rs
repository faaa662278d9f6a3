use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::robot::Violation;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Two operands disagree on a dimension.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// A NaN or infinity reached an operation that requires finite input.
    NonFinite { what: &'static str },
    /// A scalar argument is outside its admissible range.
    InvalidParameter { name: &'static str, reason: &'static str },
    /// The robot description breaks one or more model invariants.
    InvalidModel(Vec<Violation>),
    /// The configuration is not a single-rank-drop singularity.
    NotSimpleSingularity { rank: usize, task_dim: usize },
    /// A matrix that must have full row rank does not.
    RankDeficient { expected: usize, found: usize },
    /// The chosen `K_p` block is singular or too badly conditioned.
    SingularPartition { condition: f64 },
    /// A matrix that must be symmetric is not.
    NotSymmetric { asymmetry: f64 },
    /// The SVD iteration did not converge.
    Decomposition,
    /// A user supplied Jacobian provider failed.
    Provider(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DimensionMismatch { what, expected, found } => {
                write!(f, "dimension mismatch in {what}: expected {expected}, found {found}")
            }
            Self::NonFinite { what } => write!(f, "non-finite value in {what}"),
            Self::InvalidParameter { name, reason } => write!(f, "invalid {name}: {reason}"),
            Self::InvalidModel(violations) => {
                f.write_str("invalid robot model")?;
                for v in violations {
                    write!(f, "; {v}")?;
                }
                Ok(())
            }
            Self::NotSimpleSingularity { rank, task_dim } => write!(
                f,
                "not a simple singularity: rank {rank}, expected {}",
                task_dim.saturating_sub(1)
            ),
            Self::RankDeficient { expected, found } => {
                write!(f, "rank-deficient matrix: rank {found}, expected {expected}")
            }
            Self::SingularPartition { condition } => {
                write!(f, "partition block K_p is singular (condition estimate {condition:e})")
            }
            Self::NotSymmetric { asymmetry } => {
                write!(f, "matrix is not symmetric (max asymmetry {asymmetry:e})")
            }
            Self::Decomposition => f.write_str("singular value decomposition did not converge"),
            Self::Provider(msg) => write!(f, "jacobian provider failed: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
