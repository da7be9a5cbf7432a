use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};
use num_rational::BigRational;

use jetpde_cli::input::{parse_base_list, parse_rational, OperatorInput, WebInput};
use jetpde_cli::pipeline::{run_operator, run_oracle, run_web, RunFlags};
use jetpde_cli::report::Report;
use jetpde_cli::exit_code;

/// Exact analysis of linear homogeneous PDE systems and curvilinear webs:
/// prolongation towers, solution-space bounds, tautological connections,
/// curvature, and concentration checks.
#[derive(Parser)]
#[command(name = "jetpde", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Emit the report as JSON (default is text).
    #[arg(long, global = true, action = ArgAction::SetTrue, conflicts_with = "text")]
    json: bool,

    /// Emit the report as text (the default).
    #[arg(long, global = true, action = ArgAction::SetTrue)]
    text: bool,

    /// Usable order of the coefficient jets (overrides file and default).
    #[arg(long, global = true)]
    jet_order: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze an operator file: range, critical order, symbol ranks,
    /// calibration, and (when calibrated) curvature and concentration.
    AnalyzeOperator {
        file: PathBuf,
        /// Re-run the analysis at this many fresh random base points.
        #[arg(long)]
        probes: Option<usize>,
        /// Include the curvature matrices in the report.
        #[arg(long, action = ArgAction::SetTrue)]
        emit_curvature: bool,
    },
    /// Analyze a web file through the abelian-relation pipeline.
    AnalyzeWeb {
        file: PathBuf,
        #[arg(long)]
        probes: Option<usize>,
        #[arg(long, action = ArgAction::SetTrue)]
        emit_curvature: bool,
    },
    /// Generate the standard (n+3)-web family for a parameter c and analyze it.
    WcFamily {
        /// Ambient dimension (n >= 2).
        #[arg(long)]
        n: usize,
        /// Family parameter, an exact rational such as 0, 1/7, or -2/3.
        #[arg(long, value_parser = parse_rational_arg)]
        c: BigRational,
        /// Base point as comma-separated rationals, e.g. "1/3,1/5".
        /// Defaults to a deterministic search for an admissible point.
        #[arg(long, value_parser = parse_base_arg)]
        base: Option<std::vec::Vec<BigRational>>,
        #[arg(long)]
        probes: Option<usize>,
        #[arg(long, action = ArgAction::SetTrue)]
        emit_curvature: bool,
    },
    /// Brute-force kernel dimensions of the prolonged systems up to level h,
    /// compared against the counting formula where it applies.
    OracleRanks {
        file: PathBuf,
        /// Highest prolongation level to check.
        #[arg(long = "h")]
        h: usize,
    },
}

fn parse_rational_arg(text: &str) -> Result<BigRational, String> {
    parse_rational(text).map_err(|e| e.to_string())
}

fn parse_base_arg(text: &str) -> Result<Vec<BigRational>, String> {
    parse_base_list(text).map_err(|e| e.to_string())
}

fn run(cli: &Cli) -> jetpde::Result<Report> {
    match &cli.command {
        Command::AnalyzeOperator { file, probes, emit_curvature } => {
            let input = OperatorInput::from_file(file)?;
            let flags = RunFlags {
                jet_order: cli.jet_order,
                emit_curvature: *emit_curvature,
                probes: *probes,
            };
            run_operator(&input, &flags)
        }
        Command::AnalyzeWeb { file, probes, emit_curvature } => {
            let input = WebInput::from_file(file)?;
            let flags = RunFlags {
                jet_order: cli.jet_order,
                emit_curvature: *emit_curvature,
                probes: *probes,
            };
            run_web("analyze-web", &input.web, None, &flags, input.jet_order)
        }
        Command::WcFamily { n, c, base, probes, emit_curvature } => {
            let web = jetpde::wc_family(*n, c, base.clone())?;
            let flags = RunFlags {
                jet_order: cli.jet_order,
                emit_curvature: *emit_curvature,
                probes: *probes,
            };
            run_web("wc-family", &web, Some(c), &flags, None)
        }
        Command::OracleRanks { file, h } => {
            let input = OperatorInput::from_file(file)?;
            let flags = RunFlags {
                jet_order: cli.jet_order,
                emit_curvature: false,
                probes: None,
            };
            run_oracle(&input, *h, &flags)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(&cli)));
    match outcome {
        Ok(Ok(report)) => {
            if cli.json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            ExitCode::SUCCESS
        }
        Ok(Err(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err) as u8)
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            eprintln!("error: internal consistency assertion failed: {msg}");
            ExitCode::from(3)
        }
    }
}
