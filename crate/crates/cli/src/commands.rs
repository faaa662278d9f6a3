//! The four subcommands. Each returns its complete standard output so that
//! nothing is printed when a command fails part way.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use singescape_core::benchmark::{
    closed_form_escape, closed_form_j11, closed_form_jacobian, singular_values_first3, BenchmarkJacobian,
    BenchmarkParams, EpsilonBranch,
};
use singescape_core::escape::{analyze, coefficients_with_tol, EscapeAnalysis, EscapeOptions, DEFAULT_FD_STEP};
use singescape_core::kinematics::{checked_jacobian, JacobianProvider};
use singescape_core::robot::benchmark_model;
use singescape_core::singularity::svd_decompose;
use singescape_core::trajectory::{escape_plan, integrate_constant_rate, PlanStatus, SimulationConfig};
use singescape_core::{Classification, DMatrix, DVector, Error, JointKind, RobotModel, DEFAULT_TOL_REL};

use crate::report::{AnalysisReport, Tolerances};
use crate::robot_file::load_robot;
use crate::tables::{emit_csv, emit_sweep_csv, SweepRow};
use crate::values::{parse_epsilons, parse_grid, parse_joint_values};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Precondition(String),
    #[error("{}", .failures.join("\n"))]
    Verification { summary: String, failures: Vec<String> },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Input(_) => 1,
            Self::Precondition(_) => 2,
            Self::Verification { .. } => 3,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

/// Analysis failures caused by the configuration rather than the inputs.
fn from_core(e: Error) -> CliError {
    match e {
        Error::NotSimpleSingularity { .. }
        | Error::RankDeficient { .. }
        | Error::SingularPartition { .. }
        | Error::Decomposition => CliError::Precondition(e.to_string()),
        _ => CliError::Input(e.to_string()),
    }
}

/// Successful command output.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Output {
    pub stdout: String,
    pub warnings: Vec<String>,
}

impl From<String> for Output {
    fn from(stdout: String) -> Self {
        Self {
            stdout,
            warnings: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum JacobianSource {
    /// Closed form for the six-DOF benchmark robot, DH otherwise.
    Auto,
    /// Geometric Jacobian of the DH chain.
    Numeric,
    /// Closed form of the six-DOF benchmark robot.
    ClosedForm,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Robot description (JSON).
    #[arg(long)]
    pub robot: PathBuf,
    /// Relative rank threshold on the singular values.
    #[arg(long, default_value_t = DEFAULT_TOL_REL)]
    pub tol_rel: f64,
    /// 1-based joint used as q_s, or `auto` for pivoting. Defaults to joint 2
    /// for the benchmark robot and to pivoting otherwise.
    #[arg(long)]
    pub pin_qs: Option<String>,
    #[arg(long, value_enum, default_value_t = JacobianSource::Auto)]
    pub jacobian: JacobianSource,
}

enum Provider {
    Numeric(RobotModel),
    ClosedForm(BenchmarkJacobian),
}

impl JacobianProvider for Provider {
    fn joint_count(&self) -> usize {
        match self {
            Self::Numeric(m) => m.joint_count(),
            Self::ClosedForm(b) => b.joint_count(),
        }
    }

    fn task_dim(&self) -> usize {
        match self {
            Self::Numeric(m) => m.task_dim,
            Self::ClosedForm(b) => b.task_dim(),
        }
    }

    fn jacobian(&self, q: &[f64]) -> singescape_core::Result<DMatrix<f64>> {
        match self {
            Self::Numeric(m) => m.jacobian(q),
            Self::ClosedForm(b) => b.jacobian(q),
        }
    }
}

struct Setup {
    model: RobotModel,
    provider: Provider,
    pinned: Option<Vec<usize>>,
}

impl Setup {
    fn load(args: &ModelArgs) -> Result<Self, CliError> {
        let model = load_robot(&args.robot).map_err(input)?;
        let params = BenchmarkParams::recognize(&model);
        let provider = match (args.jacobian, params) {
            (JacobianSource::Numeric, _) | (JacobianSource::Auto, None) => Provider::Numeric(model.clone()),
            (_, Some(p)) => Provider::ClosedForm(BenchmarkJacobian::full(p)),
            (JacobianSource::ClosedForm, None) => {
                return Err(CliError::Input(format!(
                    "robot `{}` does not have the six-DOF benchmark structure; the closed form is unavailable",
                    model.name
                )))
            }
        };
        let pinned = match args.pin_qs.as_deref() {
            None => params.map(|_| vec![1]),
            Some("auto") => None,
            Some(text) => {
                let idx: usize = text
                    .parse()
                    .map_err(|_| CliError::Input(format!("--pin-qs expects a joint number or `auto`, got `{text}`")))?;
                if idx == 0 || idx > model.joint_count() {
                    return Err(CliError::Input(format!(
                        "--pin-qs {idx} is outside joints 1..={}",
                        model.joint_count()
                    )));
                }
                Some(vec![idx - 1])
            }
        };
        if !(args.tol_rel > 0.0 && args.tol_rel < 1.0) {
            return Err(CliError::Input("--tol-rel must lie in (0, 1)".into()));
        }
        Ok(Self {
            model,
            provider,
            pinned,
        })
    }

    fn joint_values(&self, flag: &str, text: &str) -> Result<Vec<f64>, CliError> {
        let values = parse_joint_values(text).map_err(|e| CliError::Input(format!("{flag}: {e}")))?;
        if values.len() != self.model.joint_count() {
            return Err(CliError::Input(format!(
                "{flag}: expected {} values, got {}",
                self.model.joint_count(),
                values.len()
            )));
        }
        for (i, ((_, deg), joint)) in values.iter().zip(&self.model.joints).enumerate() {
            if *deg && joint.kind == JointKind::Prismatic {
                return Err(CliError::Input(format!(
                    "{flag}: joint {} is prismatic, `deg:` does not apply",
                    i + 1
                )));
            }
        }
        Ok(values.into_iter().map(|(v, _)| v).collect())
    }

    fn options(&self, tol_rel: f64) -> EscapeOptions {
        EscapeOptions {
            tol_rel,
            pinned_s: self.pinned.clone(),
            ..EscapeOptions::default()
        }
    }

    /// `h` of the closed form when the arm block is what went singular.
    fn benchmark_h(&self, analysis: &EscapeAnalysis) -> Option<f64> {
        let Provider::ClosedForm(b) = &self.provider else {
            return None;
        };
        let u = &analysis.frame.u_m;
        if (u[2].abs() - 1.0).abs() > 1e-9 {
            return None;
        }
        Some(closed_form_escape(&b.params, EpsilonBranch::nearest(analysis.q[2])).h)
    }
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Joint values, comma-separated; prefix an entry with `deg:` for degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub q: String,
    /// Fail with exit code 2 unless the configuration is singular.
    #[arg(long)]
    pub require_singular: bool,
}

pub fn run_analyze(args: &AnalyzeArgs) -> Result<Output, CliError> {
    let setup = Setup::load(&args.model)?;
    let q = setup.joint_values("--q", &args.q)?;
    let tol_rel = args.model.tol_rel;
    let j = checked_jacobian(&setup.provider, &q).map_err(input)?;
    let svd = svd_decompose(&j, tol_rel).map_err(from_core)?;
    let m = svd.task_dim();
    let mut report = AnalysisReport {
        robot: setup.model.name.clone(),
        q: q.clone(),
        singular_values: svd.sigma.iter().copied().collect(),
        rank: svd.rank,
        u_m: svd.u.column(m - 1).iter().copied().collect(),
        classification: None,
        a: None,
        b: None,
        c: None,
        h: None,
        tolerances: Tolerances {
            tol_rel,
            class_tol: None,
            fd_step: DEFAULT_FD_STEP,
        },
    };
    if svd.rank == m {
        if args.require_singular {
            return Err(CliError::Precondition(format!(
                "configuration is not singular (rank {m} of {m})"
            )));
        }
        return Ok(report.to_json().into());
    }
    let analysis = analyze(&setup.provider, &q, &setup.options(tol_rel)).map_err(from_core)?;
    let coef = &analysis.coefficients;
    report.u_m = analysis.frame.u_m.iter().copied().collect();
    report.classification = Some(coef.classification);
    report.a = Some(coef.a.row_iter().map(|r| r.iter().copied().collect()).collect());
    report.b = Some(coef.b.iter().copied().collect());
    report.c = Some(coef.c);
    report.h = setup.benchmark_h(&analysis);
    report.tolerances.class_tol = Some(coef.tol);
    Ok(report.to_json().into())
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Values of a2: comma list, `start:end:count`, or empty.
    #[arg(long, allow_hyphen_values = true)]
    pub a2: Option<String>,
    /// Values of d4: comma list, `start:end:count`, or empty.
    #[arg(long, allow_hyphen_values = true)]
    pub d4: Option<String>,
    /// Branches ε of the singular locus θ3 = kπ + π/2.
    #[arg(long, allow_hyphen_values = true, default_value = "-1,1")]
    pub epsilon: String,
}

const DEFAULT_LENGTHS: &str = "0.5,1,2";

impl GridArgs {
    /// Grid points in row-major order (a2, then d4, then ε).
    fn points(&self, defaults: Option<BenchmarkParams>) -> Result<Vec<(BenchmarkParams, EpsilonBranch)>, CliError> {
        let a2_default = defaults.map_or(DEFAULT_LENGTHS.to_string(), |p| p.a2.to_string());
        let d4_default = defaults.map_or(DEFAULT_LENGTHS.to_string(), |p| p.d4.to_string());
        let a2 = parse_grid(self.a2.as_deref().unwrap_or(&a2_default)).map_err(|e| input(format!("--a2: {e}")))?;
        let d4 = parse_grid(self.d4.as_deref().unwrap_or(&d4_default)).map_err(|e| input(format!("--d4: {e}")))?;
        let eps = parse_epsilons(&self.epsilon).map_err(|e| input(format!("--epsilon: {e}")))?;
        let mut out = Vec::with_capacity(a2.len() * d4.len() * eps.len());
        for &a in &a2 {
            for &d in &d4 {
                let p = BenchmarkParams::new(a, d).map_err(|e| input(format!("a2 = {a}, d4 = {d}: {e}")))?;
                for &e in &eps {
                    out.push((p, EpsilonBranch::from_epsilon(e).map_err(input)?));
                }
            }
        }
        Ok(out)
    }
}

/// Singular configuration used for benchmark grid points: the wrist is kept
/// at q5 = π/2, well away from its own singularity.
fn locus_q(branch: EpsilonBranch) -> [f64; 6] {
    [0.0, 0.0, branch.theta3(), 0.0, std::f64::consts::FRAC_PI_2, 0.0]
}

fn pinned_q2() -> EscapeOptions {
    EscapeOptions {
        pinned_s: Some(vec![1]),
        ..EscapeOptions::default()
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Benchmark robot whose a2 and d4 become the defaults of the grid.
    #[arg(long)]
    pub robot: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Jacobian behind the `A_pipeline` column.
    #[arg(long, value_enum, default_value_t = JacobianSource::ClosedForm)]
    pub jacobian: JacobianSource,
}

pub fn run_sweep(args: &SweepArgs) -> Result<Output, CliError> {
    let defaults = match &args.robot {
        Some(path) => {
            let model = load_robot(path).map_err(input)?;
            Some(BenchmarkParams::recognize(&model).ok_or_else(|| {
                CliError::Input(format!(
                    "robot `{}` does not have the six-DOF benchmark structure",
                    model.name
                ))
            })?)
        }
        None => None,
    };
    let points = args.grid.points(defaults)?;
    let numeric = args.jacobian == JacobianSource::Numeric;
    let rows = points
        .par_iter()
        .map(|&(p, branch)| {
            let cf = closed_form_escape(&p, branch);
            let q = locus_q(branch);
            let analysis = if numeric {
                let model = benchmark_model(p.a2, p.d4).map_err(input)?;
                analyze(&model, &q, &pinned_q2())
            } else {
                analyze(&BenchmarkJacobian::full(p), &q, &pinned_q2())
            }
            .map_err(|e| {
                CliError::Precondition(format!(
                    "a2 = {}, d4 = {}, epsilon = {}: {e}",
                    p.a2,
                    p.d4,
                    branch.epsilon()
                ))
            })?;
            Ok(SweepRow {
                a2: p.a2,
                d4: p.d4,
                epsilon: branch.epsilon() as i8,
                a: cf.a,
                h: cf.h,
                class: cf.classification,
                a_pipeline: analysis.coefficients.a[(0, 0)],
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(emit_sweep_csv(&rows).into())
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Start configuration; `deg:` marks an entry in degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub q0: String,
    /// Constant joint rate; `deg:` marks an entry in degrees per second.
    #[arg(
        long,
        allow_hyphen_values = true,
        required_unless_present = "escape",
        conflicts_with = "escape"
    )]
    pub qdot: Option<String>,
    /// Use the planned escape rate from a singular q0.
    #[arg(long)]
    pub escape: bool,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 0.1)]
    pub t_end: f64,
    /// Norm of the escape rate q̇_s.
    #[arg(long, default_value_t = 1.0)]
    pub qs_magnitude: f64,
}

pub fn run_simulate(args: &SimulateArgs) -> Result<Output, CliError> {
    let setup = Setup::load(&args.model)?;
    let q0 = setup.joint_values("--q0", &args.q0)?;
    let cfg = SimulationConfig {
        dt: args.dt,
        t_end: args.t_end,
        sigma_tol: args.model.tol_rel,
        qs_magnitude: args.qs_magnitude,
    };
    cfg.validate().map_err(input)?;
    if !(args.qs_magnitude > 0.0 && args.qs_magnitude.is_finite()) {
        return Err(CliError::Input("--qs-magnitude must be positive and finite".into()));
    }
    let mut warnings = Vec::new();
    let (qdot, direction) = if args.escape {
        let plan = escape_plan(&setup.provider, &q0, &cfg, setup.pinned.as_deref()).map_err(from_core)?;
        if plan.status == PlanStatus::NoFeasiblePath {
            warnings.push("no feasible escape path: A vanishes, the planned rate is zero".to_string());
        }
        (plan.qdot.iter().copied().collect(), Some(plan.analysis.frame.u_m))
    } else {
        let text = args.qdot.as_deref().unwrap_or_default();
        (setup.joint_values("--qdot", text)?, None)
    };
    let trace = integrate_constant_rate(&setup.provider, &q0, &qdot, &cfg, direction.as_ref()).map_err(from_core)?;
    Ok(Output {
        stdout: emit_csv(&trace, q0.len()),
        warnings,
    })
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Adds 1e-3 to every entry of H before forming A (test hook).
    #[arg(long = "perturb-H", hide = true)]
    pub perturb_h: bool,
}

const A_REL_TOL: f64 = 1e-6;
const A_ZERO_TOL: f64 = 1e-9;
const SIGMA_TOL: f64 = 1e-9;
const BC_TOL: f64 = 1e-14;
const FD_TOL: f64 = 1e-5;

#[derive(Debug, Default, Clone, Copy)]
struct Deviations {
    a_rel: f64,
    a_degenerate: f64,
    sigma: f64,
    bc: f64,
    fd: f64,
    j12: f64,
}

impl Deviations {
    fn merge(self, o: Self) -> Self {
        Self {
            a_rel: self.a_rel.max(o.a_rel),
            a_degenerate: self.a_degenerate.max(o.a_degenerate),
            sigma: self.sigma.max(o.sigma),
            bc: self.bc.max(o.bc),
            fd: self.fd.max(o.fd),
            j12: self.j12.max(o.j12),
        }
    }
}

fn verify_point(
    p: BenchmarkParams,
    branch: EpsilonBranch,
    perturb: bool,
) -> Result<(Deviations, Vec<String>), CliError> {
    let provider = BenchmarkJacobian::full(p);
    let q = locus_q(branch);
    let mut analysis = analyze(&provider, &q, &pinned_q2()).map_err(from_core)?;
    if perturb {
        let h = analysis.coefficients.h.add_scalar(1e-3);
        let y = DVector::zeros(analysis.frame.k.nrows());
        analysis.coefficients =
            coefficients_with_tol(&h, &analysis.partition, &y, analysis.coefficients.tol).map_err(from_core)?;
    }
    let coef = &analysis.coefficients;
    let a = coef.a[(0, 0)];
    let cf = closed_form_escape(&p, branch);
    let degenerate = cf.classification == Classification::NoFeasiblePath;
    let mut dev = Deviations::default();
    if degenerate {
        dev.a_degenerate = a.abs();
    } else {
        dev.a_rel = (a - cf.a).abs() / cf.a.abs();
    }

    for k in 0..=12 {
        let t = branch.theta3() + std::f64::consts::PI * k as f64 / 6.0;
        let j11 = closed_form_j11(&p, t);
        let numeric =
            svd_decompose(&DMatrix::from_iterator(3, 3, j11.iter().copied()), DEFAULT_TOL_REL).map_err(from_core)?;
        for (x, y) in singular_values_first3(&p, t).iter().zip(numeric.sigma.iter()) {
            dev.sigma = dev.sigma.max((x - y).abs());
        }
    }
    dev.bc = coef.b.iter().fold(coef.c.abs(), |acc, v| acc.max(v.abs()));

    let qdot = DVector::from_column_slice(&[0.3, -0.5, 0.7, 0.2, -0.4, 0.6]);
    let step = 1e-4;
    let rate = |t: f64| -> f64 {
        let qt: [f64; 6] = std::array::from_fn(|i| q[i] + qdot[i] * t);
        let j = DMatrix::from_iterator(6, 6, closed_form_jacobian(&p, &qt).iter().copied());
        analysis.frame.u_m.dot(&(j * &qdot))
    };
    let fd = (rate(step) - rate(-step)) / (2.0 * step);
    let predicted = analysis.acceleration_for(&qdot).map_err(from_core)?;
    dev.fd = (predicted - fd).abs();

    let j = closed_form_jacobian(&p, &[0.4, -1.3, 2.2, 0.7, -0.9, 1.6]);
    dev.j12 = j.view((0, 3), (3, 3)).iter().fold(0.0, |acc: f64, v| acc.max(v.abs()));

    let mut failures = Vec::new();
    let label = format!("a2 = {}, d4 = {}, epsilon = {:+}", p.a2, p.d4, branch.epsilon());
    let checks = [
        ("relative A deviation", dev.a_rel, A_REL_TOL),
        ("|A| on the degenerate branch", dev.a_degenerate, A_ZERO_TOL),
        ("singular value deviation", dev.sigma, SIGMA_TOL),
        ("max |B|, |C|", dev.bc, BC_TOL),
        ("finite-difference deviation", dev.fd, FD_TOL),
        ("max |J12|", dev.j12, 0.0),
    ];
    for (what, value, tol) in checks {
        if value.is_nan() || value > tol {
            failures.push(format!("{label}: {what} {value:.3e} exceeds {tol:.0e}"));
        }
    }
    if coef.classification != cf.classification {
        failures.push(format!(
            "{label}: pipeline class {} differs from closed form {}",
            coef.classification, cf.classification
        ));
    }
    Ok((dev, failures))
}

pub fn run_verify(args: &VerifyArgs) -> Result<Output, CliError> {
    let points = args.grid.points(None)?;
    let results = points
        .par_iter()
        .map(|&(p, b)| verify_point(p, b, args.perturb_h))
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut total = Deviations::default();
    let mut failures = Vec::new();
    for (dev, f) in results {
        total = total.merge(dev);
        failures.extend(f);
    }
    let summary = format!(
        "grid points: {}\n\
         max relative |A_num - A_cf|: {:.3e} (tol {A_REL_TOL:.0e})\n\
         max |A| on degenerate branch: {:.3e} (tol {A_ZERO_TOL:.0e})\n\
         max singular value deviation: {:.3e} (tol {SIGMA_TOL:.0e})\n\
         max |B|, |C| at path start: {:.3e} (tol {BC_TOL:.0e})\n\
         max finite-difference deviation: {:.3e} (tol {FD_TOL:.0e})\n\
         max |J12|: {:.3e}\n\
         failures: {}\n",
        points.len(),
        total.a_rel,
        total.a_degenerate,
        total.sigma,
        total.bc,
        total.fd,
        total.j12,
        failures.len()
    );
    if failures.is_empty() {
        Ok(summary.into())
    } else {
        Err(CliError::Verification { summary, failures })
    }
}
