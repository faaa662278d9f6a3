//! JSON robot descriptions.
//!
//! ```json
//! {
//!   "name": "planar-2r",
//!   "task_dim": 3,
//!   "joints": [
//!     { "kind": "revolute", "alpha_deg": 0, "a": 1.0, "d": 0, "theta_offset_deg": 0 }
//!   ]
//! }
//! ```
//!
//! Angles are given either as `*_deg` or `*_rad`. Numbers may also be
//! written as strings (`"NaN"`, `"inf"`) so that invalid values reach the
//! semantic checks instead of failing as syntax.

use std::path::Path;

use serde::{Deserialize, Serialize};
use singescape_core::robot::{validate_model, ValidationScope};
use singescape_core::{DhJoint, JointKind, RobotModel};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}", semantic_message(.joint, .field, .message))]
    Semantic {
        joint: Option<usize>,
        field: String,
        message: String,
    },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

fn semantic_message(joint: &Option<usize>, field: &str, message: &str) -> String {
    match joint {
        Some(j) => format!("joint {j}, field `{field}`: {message}"),
        None => format!("field `{field}`: {message}"),
    }
}

impl ParseError {
    fn semantic(joint: Option<usize>, field: &str, message: impl Into<String>) -> Self {
        Self::Semantic {
            joint,
            field: field.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Number {
    Plain(f64),
    #[serde(with = "text_number")]
    Text(f64),
}

impl Number {
    fn value(self) -> f64 {
        match self {
            Self::Plain(v) | Self::Text(v) => v,
        }
    }
}

mod text_number {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let text = String::deserialize(d)?;
        text.trim().parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RobotFile {
    name: String,
    task_dim: usize,
    joints: Vec<JointEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointEntry {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha_deg: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha_rad: Option<Number>,
    a: Number,
    d: Number,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta_offset_deg: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta_offset_rad: Option<Number>,
}

fn angle(joint: usize, field: &str, deg: Option<Number>, rad: Option<Number>) -> Result<f64, ParseError> {
    match (deg, rad) {
        (Some(d), None) => Ok(d.value().to_radians()),
        (None, Some(r)) => Ok(r.value()),
        (None, None) => Ok(0.0),
        (Some(_), Some(_)) => Err(ParseError::semantic(
            Some(joint),
            field,
            format!("give either {field}_deg or {field}_rad, not both"),
        )),
    }
}

/// Parses and validates a robot description.
pub fn parse_robot_description(text: &str) -> Result<RobotModel, ParseError> {
    let file: RobotFile = serde_json::from_str(text).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut joints = Vec::with_capacity(file.joints.len());
    for (i, entry) in file.joints.into_iter().enumerate() {
        let kind: JointKind = entry
            .kind
            .parse()
            .map_err(|_| ParseError::semantic(Some(i), "kind", format!("unknown joint kind `{}`", entry.kind)))?;
        joints.push(DhJoint {
            kind,
            alpha: angle(i, "alpha", entry.alpha_deg, entry.alpha_rad)?,
            a: entry.a.value(),
            d: entry.d.value(),
            theta_offset: angle(i, "theta_offset", entry.theta_offset_deg, entry.theta_offset_rad)?,
        });
    }
    let model = RobotModel {
        name: file.name,
        task_dim: file.task_dim,
        joints,
    };
    if let Some(v) = validate_model(&model, ValidationScope::Kinematics).into_iter().next() {
        return Err(ParseError::semantic(v.joint, v.field, v.message));
    }
    Ok(model)
}

pub fn load_robot(path: &Path) -> Result<RobotModel, ParseError> {
    let text = std::fs::read_to_string(path).map_err(|e| ParseError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_robot_description(&text)
}

/// Emits degrees when the value survives the round trip through degrees
/// bit for bit, radians otherwise.
fn emit_angle(rad: f64) -> (Option<Number>, Option<Number>) {
    let deg = rad.to_degrees();
    if deg.to_radians() == rad && deg == deg.round() {
        (Some(number(deg)), None)
    } else {
        (None, Some(number(rad)))
    }
}

fn number(v: f64) -> Number {
    if v.is_finite() {
        Number::Plain(v)
    } else {
        Number::Text(v)
    }
}

/// Pretty-printed description that [`parse_robot_description`] maps back to
/// an identical model.
pub fn emit_robot_description(model: &RobotModel) -> String {
    let joints = model
        .joints
        .iter()
        .map(|j| {
            let (alpha_deg, alpha_rad) = emit_angle(j.alpha);
            let (theta_offset_deg, theta_offset_rad) = emit_angle(j.theta_offset);
            JointEntry {
                kind: j.kind.as_str().to_string(),
                alpha_deg,
                alpha_rad,
                a: number(j.a),
                d: number(j.d),
                theta_offset_deg,
                theta_offset_rad,
            }
        })
        .collect();
    let file = RobotFile {
        name: model.name.clone(),
        task_dim: model.task_dim,
        joints,
    };
    let mut out = serde_json::to_string_pretty(&file).expect("robot description serializes");
    out.push('\n');
    out
}
