//! The JSON document printed by `singescape analyze`.

use serde::{Deserialize, Serialize};
use singescape_core::escape::{classify, Classification};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative rank threshold on the singular values.
    pub tol_rel: f64,
    /// Zero band used when classifying `A`.
    pub class_tol: Option<f64>,
    /// Base finite-difference step for the Hessian of `L`.
    pub fd_step: f64,
}

/// Escape-analysis fields are `null` when the configuration is not singular.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisReport {
    pub robot: String,
    /// Joint values in radians (revolute) or meters (prismatic).
    pub q: Vec<f64>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub u_m: Vec<f64>,
    pub classification: Option<Classification>,
    #[serde(rename = "A")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(rename = "B")]
    pub b: Option<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    /// Sign parameter of the closed-form benchmark, only for benchmark runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    pub tolerances: Tolerances,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// True when `classification` follows from `A` under the reported
    /// tolerance, or both are absent.
    pub fn is_consistent(&self) -> bool {
        match (&self.a, self.classification, self.tolerances.class_tol) {
            (None, None, _) => true,
            (Some(rows), Some(class), Some(tol)) => {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return false;
                }
                let a = singescape_core::DMatrix::from_fn(n, n, |i, j| rows[i][j]);
                classify(&a, tol).map(|c| c == class).unwrap_or(false)
            }
            _ => false,
        }
    }
}
