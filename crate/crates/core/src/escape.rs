//! Second-order escape analysis at a simple singularity.
//!
//! At a configuration where `J` has lost exactly one rank, the singular-row
//! velocity `ḋ = L(q) q̇` vanishes. Its time derivative is the quadratic form
//! `d̈ = q̇ᵀ H q̇` with `H[i][j] = ∂L_j/∂q_i` (`u_m` frozen at the singular
//! configuration). Splitting the joint rates as `q̇ = M Ẏ + N q̇_s`, where
//! `Ẏ = K q̇` are the non-singular task rates, gives
//!
//! ```text
//! d̈ = q̇_sᵀ A q̇_s + B q̇_s + C
//! A = sym(Nᵀ H N),  B = Ẏᵀ Mᵀ (H + Hᵀ) N,  C = Ẏᵀ Mᵀ H M Ẏ
//! ```
//!
//! Starting from rest in the non-singular directions (`Ẏ = 0`) leaves
//! `d̈ = q̇_sᵀ A q̇_s`, so the definiteness of `A` decides whether the
//! end-effector can leave along `+u_m`, along `−u_m`, or not at all.

use alloc::vec::Vec;
use core::fmt;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kinematics::{checked_jacobian, JacobianProvider};
use crate::linalg::{condition_number, max_abs, max_asymmetry, select_columns, symmetrize};
use crate::singularity::{svd_decompose, SingularFrame, SvdResult, DEFAULT_TOL_REL};

/// Largest acceptable condition estimate for `K_p`.
pub const MAX_PARTITION_CONDITION: f64 = 1e8;
/// Base relative finite-difference step; the step for joint `i` is
/// `DEFAULT_FD_STEP · max(1, |q_i|)`.
pub const DEFAULT_FD_STEP: f64 = 1e-6;
/// Accepted asymmetry for inputs to [`classify`].
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    /// `d̈ > 0`: the end-effector leaves along `+u_m`.
    EscapeAlongUm,
    /// `d̈ < 0`: the end-effector leaves along `−u_m`.
    EscapeOppositeUm,
    /// `A` vanishes; no acceleration along `u_m` is reachable.
    NoFeasiblePath,
    /// `A` has eigenvalues of both signs (only possible when `n > m`).
    IndefiniteQuadratic,
}

impl Classification {
    pub const ALL: [Classification; 4] = [
        Self::EscapeAlongUm,
        Self::EscapeOppositeUm,
        Self::NoFeasiblePath,
        Self::IndefiniteQuadratic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::EscapeAlongUm => "EscapeAlongUm",
            Self::EscapeOppositeUm => "EscapeOppositeUm",
            Self::NoFeasiblePath => "NoFeasiblePath",
            Self::IndefiniteQuadratic => "IndefiniteQuadratic",
        }
    }

    /// Sign of `d̈` along the escape path: `+1`, `−1`, or `0`.
    /// Indefinite forms admit both signs and report `0`.
    pub fn ddot_sign(self) -> i8 {
        match self {
            Self::EscapeAlongUm => 1,
            Self::EscapeOppositeUm => -1,
            Self::NoFeasiblePath | Self::IndefiniteQuadratic => 0,
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Classification {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or(Error::InvalidParameter {
                name: "classification",
                reason: "unknown classification name",
            })
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Classification {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Classification {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let s = <alloc::borrow::Cow<'de, str>>::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Column split of `K = [K_p K_s]` and the induced maps `q̇ = M Ẏ + N q̇_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub p_indices: Vec<usize>,
    pub s_indices: Vec<usize>,
    pub k_p: DMatrix<f64>,
    pub k_s: DMatrix<f64>,
    /// n×(m−1)
    pub m: DMatrix<f64>,
    /// n×(n−m+1)
    pub n: DMatrix<f64>,
    pub condition: f64,
}

impl Partition {
    /// Splits a joint rate into `(Ẏ, q̇_s) = (K q̇, q̇[s])`.
    pub fn decompose_rate(&self, k: &DMatrix<f64>, qdot: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        if qdot.len() != k.ncols() {
            return Err(Error::DimensionMismatch {
                what: "joint rate",
                expected: k.ncols(),
                found: qdot.len(),
            });
        }
        let y_dot = k * qdot;
        let qs_dot = DVector::from_iterator(self.s_indices.len(), self.s_indices.iter().map(|&i| qdot[i]));
        Ok((y_dot, qs_dot))
    }

    /// `M Ẏ + N q̇_s`.
    pub fn compose_rate(&self, y_dot: &DVector<f64>, qs_dot: &DVector<f64>) -> DVector<f64> {
        &self.m * y_dot + &self.n * qs_dot
    }
}

pub fn partition_columns(k: &DMatrix<f64>, pinned_s: Option<&[usize]>) -> Result<Partition> {
    let (rows, n) = k.shape();
    if rows > n {
        return Err(Error::RankDeficient {
            expected: rows,
            found: n,
        });
    }
    if rows > 0 {
        let dec = svd_decompose(k, DEFAULT_TOL_REL)?;
        if dec.rank < rows {
            return Err(Error::RankDeficient {
                expected: rows,
                found: dec.rank,
            });
        }
    }

    let p_indices = match pinned_s {
        Some(s) => {
            if s.len() != n - rows {
                return Err(Error::DimensionMismatch {
                    what: "pinned q_s indices",
                    expected: n - rows,
                    found: s.len(),
                });
            }
            let mut seen = alloc::vec![false; n];
            for &i in s {
                if i >= n || seen[i] {
                    return Err(Error::InvalidParameter {
                        name: "pinned q_s indices",
                        reason: "indices must be distinct joint indices",
                    });
                }
                seen[i] = true;
            }
            (0..n).filter(|i| !seen[*i]).collect()
        }
        None => pivoted_columns(k),
    };
    let s_indices: Vec<usize> = (0..n).filter(|i| !p_indices.contains(i)).collect();

    let k_p = select_columns(k, &p_indices);
    let k_s = select_columns(k, &s_indices);
    let condition = condition_number(&k_p);
    if condition.is_nan() || condition > MAX_PARTITION_CONDITION {
        return Err(Error::SingularPartition { condition });
    }
    let k_p_inv = k_p
        .clone()
        .try_inverse()
        .ok_or(Error::SingularPartition { condition })?;
    let reduced = -(&k_p_inv * &k_s);

    let mut m = DMatrix::zeros(n, rows);
    let mut n_map = DMatrix::zeros(n, s_indices.len());
    for (r, &i) in p_indices.iter().enumerate() {
        m.row_mut(i).copy_from(&k_p_inv.row(r));
        n_map.row_mut(i).copy_from(&reduced.row(r));
    }
    for (c, &i) in s_indices.iter().enumerate() {
        n_map[(i, c)] = 1.0;
    }

    // K·M = I and K·N = 0 up to the round-off the inverse can amplify
    let scale = 1e-10 * condition.max(1.0) * max_abs(k).max(1.0);
    let km_err = max_abs(&(k * &m - DMatrix::identity(rows, rows)));
    let kn_err = max_abs(&(k * &n_map));
    if !(km_err <= scale && kn_err <= scale) {
        return Err(Error::SingularPartition { condition });
    }

    Ok(Partition {
        p_indices,
        s_indices,
        k_p,
        k_s,
        m,
        n: n_map,
        condition,
    })
}

/// Greedy column pivoting: repeatedly take the column with the largest
/// residual norm and project it out of the rest. Returns ascending indices.
fn pivoted_columns(k: &DMatrix<f64>) -> Vec<usize> {
    let (rows, n) = k.shape();
    let mut work = k.clone();
    let mut chosen: Vec<usize> = Vec::with_capacity(rows);
    for _ in 0..rows {
        let mut best = None;
        let mut best_norm = -1.0;
        for c in (0..n).filter(|c| !chosen.contains(c)) {
            let norm = work.column(c).norm();
            if norm > best_norm {
                best_norm = norm;
                best = Some(c);
            }
        }
        let pivot = best.expect("rows <= n");
        chosen.push(pivot);
        if best_norm == 0.0 {
            continue;
        }
        let q = work.column(pivot) / best_norm;
        for c in (0..n).filter(|c| !chosen.contains(c)) {
            let proj = q.dot(&work.column(c));
            let mut col = work.column_mut(c);
            col.axpy(-proj, &q, 1.0);
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Central-difference estimate of `H[i][j] = ∂L_j/∂q_i` for
/// `L(q) = u_mᵀ J(q)`, with `u_m` held fixed.
pub fn hessian_of_l<P: JacobianProvider + ?Sized>(
    provider: &P,
    q0: &[f64],
    u_m: &DVector<f64>,
    step: f64,
) -> Result<DMatrix<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "step",
            reason: "must be positive and finite",
        });
    }
    if u_m.len() != provider.task_dim() {
        return Err(Error::DimensionMismatch {
            what: "singular direction",
            expected: provider.task_dim(),
            found: u_m.len(),
        });
    }
    if (u_m.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter {
            name: "u_m",
            reason: "singular direction must have unit norm",
        });
    }
    let n = provider.joint_count();
    if q0.len() != n {
        return Err(Error::DimensionMismatch {
            what: "joint vector",
            expected: n,
            found: q0.len(),
        });
    }
    let row_of_l = |q: &[f64]| -> Result<DVector<f64>> { Ok(checked_jacobian(provider, q)?.tr_mul(u_m)) };

    let mut h = DMatrix::zeros(n, n);
    let mut q = q0.to_vec();
    for i in 0..n {
        let hi = step * q0[i].abs().max(1.0);
        q[i] = q0[i] + hi;
        let plus = row_of_l(&q)?;
        q[i] = q0[i] - hi;
        let minus = row_of_l(&q)?;
        q[i] = q0[i];
        for j in 0..n {
            h[(i, j)] = (plus[j] - minus[j]) / (2.0 * hi);
        }
    }
    if !crate::linalg::all_finite(&h) {
        return Err(Error::NonFinite { what: "hessian of L" });
    }
    Ok(h)
}

/// Coefficients of `d̈ = q̇_sᵀ A q̇_s + B q̇_s + C`.
#[derive(Clone, Debug, PartialEq)]
pub struct EscapeCoefficients {
    pub h: DMatrix<f64>,
    /// (n−m+1)×(n−m+1), symmetric.
    pub a: DMatrix<f64>,
    /// 1×(n−m+1)
    pub b: DMatrix<f64>,
    pub c: f64,
    pub classification: Classification,
    /// Threshold used to decide `|A| ≈ 0`.
    pub tol: f64,
}

impl EscapeCoefficients {
    /// `A` as a scalar when `n = m`.
    pub fn scalar_a(&self) -> Option<f64> {
        (self.a.shape() == (1, 1)).then(|| self.a[(0, 0)])
    }
}

/// Default zero threshold for `A`: `1e-9 · (1 + ‖H‖_F)`.
pub fn default_class_tol(h: &DMatrix<f64>) -> f64 {
    1e-9 * (1.0 + h.norm())
}

pub fn coefficients(h: &DMatrix<f64>, part: &Partition, y_dot: &DVector<f64>) -> Result<EscapeCoefficients> {
    coefficients_with_tol(h, part, y_dot, default_class_tol(h))
}

pub fn coefficients_with_tol(
    h: &DMatrix<f64>,
    part: &Partition,
    y_dot: &DVector<f64>,
    tol: f64,
) -> Result<EscapeCoefficients> {
    let n = part.m.nrows();
    if h.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            what: "hessian of L",
            expected: n,
            found: h.nrows(),
        });
    }
    if y_dot.len() != part.m.ncols() {
        return Err(Error::DimensionMismatch {
            what: "non-singular task rate",
            expected: part.m.ncols(),
            found: y_dot.len(),
        });
    }
    let nt = part.n.transpose();
    let a = symmetrize(&(&nt * h * &part.n));
    let m_y = &part.m * y_dot;
    let b_row = m_y.transpose() * (h + h.transpose()) * &part.n;
    let b = DMatrix::from_iterator(1, b_row.len(), b_row.iter().copied());
    let c = (m_y.transpose() * h * &m_y)[(0, 0)];
    let classification = classify(&a, tol)?;
    Ok(EscapeCoefficients {
        h: h.clone(),
        a,
        b,
        c,
        classification,
        tol,
    })
}

/// `q̇_sᵀ A q̇_s + B q̇_s + C`.
pub fn singular_acceleration(coef: &EscapeCoefficients, qs_dot: &DVector<f64>) -> Result<f64> {
    if qs_dot.len() != coef.a.nrows() {
        return Err(Error::DimensionMismatch {
            what: "q_s rate",
            expected: coef.a.nrows(),
            found: qs_dot.len(),
        });
    }
    let quad = qs_dot.dot(&(&coef.a * qs_dot));
    let lin = (&coef.b * qs_dot)[0];
    Ok(quad + lin + coef.c)
}

/// Definiteness of `A` with zero band `tol`.
///
/// A semidefinite, nonzero `A` still admits escape in one direction only, so
/// it is reported as that direction rather than as indefinite.
pub fn classify(a: &DMatrix<f64>, tol: f64) -> Result<Classification> {
    let asym = max_asymmetry(a);
    if asym.is_nan() || asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: "must be non-negative",
        });
    }
    let eigen: Vec<f64> = if a.nrows() == 1 {
        alloc::vec![a[(0, 0)]]
    } else {
        symmetrize(a).symmetric_eigenvalues().iter().copied().collect()
    };
    if eigen.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "A" });
    }
    let max = eigen.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = eigen.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(if max <= tol && min >= -tol {
        Classification::NoFeasiblePath
    } else if min >= -tol {
        Classification::EscapeAlongUm
    } else if max <= tol {
        Classification::EscapeOppositeUm
    } else {
        Classification::IndefiniteQuadratic
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EscapeOptions {
    pub tol_rel: f64,
    /// Joint indices used as `q_s`; automatic pivoting when `None`.
    pub pinned_s: Option<Vec<usize>>,
    /// Non-singular task rate `Ẏ`; zero (start of path) when `None`.
    pub y_dot: Option<DVector<f64>>,
    pub fd_step: f64,
    /// Zero band for `A`; [`default_class_tol`] when `None`.
    pub class_tol: Option<f64>,
}

impl Default for EscapeOptions {
    fn default() -> Self {
        Self {
            tol_rel: DEFAULT_TOL_REL,
            pinned_s: None,
            y_dot: None,
            fd_step: DEFAULT_FD_STEP,
            class_tol: None,
        }
    }
}

/// Everything the pipeline computed at one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct EscapeAnalysis {
    pub q: Vec<f64>,
    pub svd: SvdResult,
    pub frame: SingularFrame,
    pub partition: Partition,
    pub coefficients: EscapeCoefficients,
}

impl EscapeAnalysis {
    /// Predicted `d̈` for an arbitrary joint rate, through the reduced form.
    pub fn acceleration_for(&self, qdot: &DVector<f64>) -> Result<f64> {
        let (y_dot, qs_dot) = self.partition.decompose_rate(&self.frame.k, qdot)?;
        let coef = coefficients_with_tol(&self.coefficients.h, &self.partition, &y_dot, self.coefficients.tol)?;
        singular_acceleration(&coef, &qs_dot)
    }
}

/// SVD → `K`/`L` split → partition → `H` → `A, B, C` at `q`.
pub fn analyze<P: JacobianProvider + ?Sized>(provider: &P, q: &[f64], opts: &EscapeOptions) -> Result<EscapeAnalysis> {
    let j = checked_jacobian(provider, q)?;
    let svd = svd_decompose(&j, opts.tol_rel)?;
    let frame = SingularFrame::new(&svd, None)?;
    let partition = partition_columns(&frame.k, opts.pinned_s.as_deref())?;
    let h = hessian_of_l(provider, q, &frame.u_m, opts.fd_step)?;
    let y_dot = opts.y_dot.clone().unwrap_or_else(|| DVector::zeros(frame.k.nrows()));
    let tol = opts.class_tol.unwrap_or_else(|| default_class_tol(&h));
    let coefficients = coefficients_with_tol(&h, &partition, &y_dot, tol)?;
    Ok(EscapeAnalysis {
        q: q.to_vec(),
        svd,
        frame,
        partition,
        coefficients,
    })
}
