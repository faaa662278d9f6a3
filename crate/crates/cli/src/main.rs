use std::process::ExitCode;

use clap::{Parser, Subcommand};
use singescape::commands::{AnalyzeArgs, SimulateArgs, SweepArgs, VerifyArgs};
use singescape::{run_analyze, run_simulate, run_sweep, run_verify, CliError};

/// Singularity escape analysis for serial manipulators.
#[derive(Parser)]
#[command(name = "singescape", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one configuration and print a JSON report.
    Analyze(AnalyzeArgs),
    /// Tabulate the benchmark escape coefficient over a2, d4 and ε.
    Sweep(SweepArgs),
    /// Integrate a constant-rate joint path and print it as CSV.
    Simulate(SimulateArgs),
    /// Cross-check the generic pipeline against the benchmark closed form.
    Verify(VerifyArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => run_analyze(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Verify(a) => run_verify(a),
    };
    match result {
        Ok(out) => {
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", out.stdout);
            ExitCode::SUCCESS
        }
        Err(CliError::Verification { summary, failures }) => {
            eprint!("{summary}");
            for f in &failures {
                eprintln!("FAIL {f}");
            }
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
