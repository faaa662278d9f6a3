//! SVD of the Jacobian, numerical rank, pseudoinverse and the split of
//! `Uᵀ J` into non-singular rows `K` and the singular row `L`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{all_finite, jacobi_svd};

/// Default relative rank threshold: `σ_i ≤ tol_rel · σ_1` counts as zero.
pub const DEFAULT_TOL_REL: f64 = 1e-8;

/// Full SVD `J = U Σ Vᵀ` with `U` (m×m), `V` (n×n) and `sigma` holding `m`
/// values in descending order (zero-padded when `m > n`).
///
/// Every column of `U` is sign-normalised so that its largest-magnitude entry
/// is positive; the matching column of `V` is flipped with it.
#[derive(Clone, Debug, PartialEq)]
pub struct SvdResult {
    pub j: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub v: DMatrix<f64>,
    pub rank: usize,
    pub tol_rel: f64,
}

impl SvdResult {
    pub fn task_dim(&self) -> usize {
        self.j.nrows()
    }

    pub fn joint_count(&self) -> usize {
        self.j.ncols()
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.get(0).copied().unwrap_or(0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma.as_slice().last().copied().unwrap_or(0.0)
    }

    /// `Σ` as an m×n matrix.
    pub fn sigma_matrix(&self) -> DMatrix<f64> {
        let (m, n) = self.j.shape();
        let mut s = DMatrix::zeros(m, n);
        for i in 0..m.min(n) {
            s[(i, i)] = self.sigma[i];
        }
        s
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.u * self.sigma_matrix() * self.v.transpose()
    }

    /// Rank-drop count `m − r`.
    pub fn nullity(&self) -> usize {
        self.task_dim() - self.rank
    }

    pub fn is_simple_singularity(&self) -> bool {
        self.task_dim() >= 1 && self.rank + 1 == self.task_dim()
    }
}

pub fn svd_decompose(j: &DMatrix<f64>, tol_rel: f64) -> Result<SvdResult> {
    let (m, n) = j.shape();
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter {
            name: "jacobian",
            reason: "matrix must have at least one row and one column",
        });
    }
    if !all_finite(j) {
        return Err(Error::NonFinite { what: "jacobian" });
    }
    if !(tol_rel > 0.0 && tol_rel < 1.0) {
        return Err(Error::InvalidParameter {
            name: "tol_rel",
            reason: "must lie in (0, 1)",
        });
    }

    let k = m.min(n);
    let (mut u, values, mut v) = jacobi_svd(j);
    if values.iter().any(|s| !s.is_finite()) {
        return Err(Error::Decomposition);
    }
    let mut sigma = DVector::zeros(m);
    for (slot, value) in values.iter().enumerate() {
        sigma[slot] = *value;
    }
    for c in 0..m {
        if leading_sign(&u.column(c).into_owned()) < 0.0 {
            u.column_mut(c).neg_mut();
            if c < k {
                v.column_mut(c).neg_mut();
            }
        }
    }

    let sigma_1 = sigma[0];
    let rank = if sigma_1 == 0.0 {
        0
    } else {
        sigma.iter().filter(|&&s| s > tol_rel * sigma_1).count()
    };

    Ok(SvdResult {
        j: j.clone(),
        u,
        sigma,
        v,
        rank,
        tol_rel,
    })
}

/// Sign of the largest-magnitude entry (first one on ties).
fn leading_sign(v: &DVector<f64>) -> f64 {
    let mut best = 0.0_f64;
    for &x in v.iter() {
        if x.abs() > best.abs() {
            best = x;
        }
    }
    if best < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Moore-Penrose pseudoinverse `J* = V Σ* Uᵀ`, with `1/σ_i` for the `rank`
/// retained values and zero elsewhere.
pub fn pseudoinverse(dec: &SvdResult) -> DMatrix<f64> {
    let (m, n) = dec.j.shape();
    let mut sigma_star = DMatrix::zeros(n, m);
    for i in 0..dec.rank {
        sigma_star[(i, i)] = 1.0 / dec.sigma[i];
    }
    &dec.v * sigma_star * dec.u.transpose()
}

/// Left singular vector of the single vanished singular value.
pub fn singular_direction(dec: &SvdResult) -> Result<DVector<f64>> {
    if !dec.is_simple_singularity() {
        return Err(Error::NotSimpleSingularity {
            rank: dec.rank,
            task_dim: dec.task_dim(),
        });
    }
    Ok(dec.u.column(dec.task_dim() - 1).into_owned())
}

/// Splits `Uᵀ J` into `K` (first `m − 1` rows) and `L` (the row paired with
/// `σ_m`).
pub fn split_kl(dec: &SvdResult) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let m = dec.task_dim();
    if dec.rank + 1 < m {
        return Err(Error::NotSimpleSingularity {
            rank: dec.rank,
            task_dim: m,
        });
    }
    let ut_j = dec.u.transpose() * &dec.j;
    let k = ut_j.rows(0, m - 1).into_owned();
    let l = ut_j.rows(m - 1, 1).into_owned();
    Ok((k, l))
}

/// `ḋ = u_mᵀ ẋ`.
pub fn singular_velocity(u_m: &DVector<f64>, x_dot: &DVector<f64>) -> Result<f64> {
    if u_m.len() != x_dot.len() {
        return Err(Error::DimensionMismatch {
            what: "task velocity",
            expected: u_m.len(),
            found: x_dot.len(),
        });
    }
    Ok(u_m.dot(x_dot))
}

/// The singular direction with its `K`/`L` split at one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularFrame {
    pub u_m: DVector<f64>,
    pub k: DMatrix<f64>,
    pub l: DMatrix<f64>,
    /// `u_mᵀ ẋ`, present when a task velocity was supplied.
    pub d_dot: Option<f64>,
}

impl SingularFrame {
    pub fn new(dec: &SvdResult, x_dot: Option<&DVector<f64>>) -> Result<Self> {
        let u_m = singular_direction(dec)?;
        let (k, l) = split_kl(dec)?;
        let d_dot = x_dot.map(|x| singular_velocity(&u_m, x)).transpose()?;
        Ok(Self { u_m, k, l, d_dot })
    }
}
