//! File formats, reports and the command-line front end for
//! [`singescape_core`].

pub mod commands;
pub mod report;
pub mod robot_file;
pub mod tables;
pub mod values;

pub use commands::{run_analyze, run_simulate, run_sweep, run_verify, CliError, Output};
pub use report::AnalysisReport;
pub use robot_file::{emit_robot_description, load_robot, parse_robot_description, ParseError};
pub use tables::{emit_csv, parse_trajectory_csv};
