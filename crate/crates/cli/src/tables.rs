//! CSV output for trajectories and parameter sweeps.

use singescape_core::escape::Classification;
use singescape_core::trajectory::TrajectorySample;

/// Scientific notation with 17 significant digits, enough to read back the
/// exact `f64`.
pub fn fmt_num(v: f64) -> String {
    // print -0.0 as 0
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

pub fn trajectory_header(n: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=n).map(|i| format!("q{i}")));
    h.extend((1..=n).map(|i| format!("qd{i}")));
    h.push("ddot".into());
    h.push("sigma_min".into());
    h
}

/// `t,q1..qn,qd1..qdn,ddot,sigma_min`; `ddot` holds the singular-direction
/// velocity `u_mᵀ ẋ`. `n` sizes the header when the trace is empty.
pub fn emit_csv(trace: &[TrajectorySample], n: usize) -> String {
    let n = trace.first().map_or(n, |s| s.q.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(trajectory_header(n)).expect("in-memory write");
    for s in trace {
        let row = std::iter::once(s.t)
            .chain(s.q.iter().copied())
            .chain(s.qdot.iter().copied())
            .chain([s.d_dot, s.sigma_min])
            .map(fmt_num);
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// One parsed trajectory row.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
    pub ddot: f64,
    pub sigma_min: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("bad header: {0}")]
    Header(String),
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
}

pub fn parse_trajectory_csv(text: &str) -> Result<Vec<TrajectoryRow>, TableError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.len() < 3 || (header.len() - 3) % 2 != 0 {
        return Err(TableError::Header(format!("{} columns", header.len())));
    }
    let n = (header.len() - 3) / 2;
    let expected = trajectory_header(n);
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(TableError::Header(header.iter().collect::<Vec<_>>().join(",")));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let vals = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| TableError::Row {
                row: i + 1,
                message: e.to_string(),
            })?;
        out.push(TrajectoryRow {
            t: vals[0],
            q: vals[1..=n].to_vec(),
            qdot: vals[n + 1..=2 * n].to_vec(),
            ddot: vals[2 * n + 1],
            sigma_min: vals[2 * n + 2],
        });
    }
    Ok(out)
}

pub const SWEEP_HEADER: [&str; 7] = ["a2", "d4", "epsilon", "A", "h", "class", "A_pipeline"];

/// A sweep grid point: closed-form `A`, `h` and class next to the generic
/// pipeline's `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub a2: f64,
    pub d4: f64,
    pub epsilon: i8,
    pub a: f64,
    pub h: f64,
    pub class: Classification,
    pub a_pipeline: f64,
}

pub fn emit_sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record([
            fmt_num(r.a2),
            fmt_num(r.d4),
            r.epsilon.to_string(),
            fmt_num(r.a),
            fmt_num(r.h),
            r.class.as_str().to_string(),
            fmt_num(r.a_pipeline),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}
