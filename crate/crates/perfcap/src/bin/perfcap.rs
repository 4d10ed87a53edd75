//! Command-line surface: capacity sweeps, eigenvalue-splitting predictions,
//! and the validation suite.
//!
//! Exit codes: 0 ok, 2 config error, 3 solver error, 4 validation failure.

use clap::{Parser, Subcommand};
use perfcap::config::{
    parse_curve_arg, parse_eps_arg, parse_germ_arg, parse_point_arg, CapacityConfig, OutputFormat,
    PredictConfig,
};
use perfcap::error::Error;
use perfcap::runner::{run_capacity, run_predict};
use perfcap::validate::{run_all, Fault, Level};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "perfcap",
    about = "Capacities of small holes in planar domains and Dirichlet eigenvalue splitting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the (u,v)-capacity of a scaled hole: direct solves against the
    /// series expansion.
    Capacity {
        /// Outer domain: circle:R, ellipse:A:B, JSON, or a JSON file path.
        #[arg(long)]
        omega: String,
        /// Hole shape, same formats.
        #[arg(long)]
        hole: String,
        /// First germ: JSON {"degree":D,"coeffs":[[h,j,value],...]} or file.
        #[arg(long)]
        germ_a: String,
        /// Second germ; defaults to the first.
        #[arg(long)]
        germ_b: Option<String>,
        /// Hole sizes: comma list or dyadic:START:COUNT.
        #[arg(long)]
        eps: String,
        /// Nystrom nodes per curve.
        #[arg(long, default_value_t = 256)]
        nodes: usize,
        /// Series truncation order.
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<String>,
        #[arg(long, default_value = "csv")]
        format: String,
        /// Also check the L2 term diagnostics (disk outer domains only).
        #[arg(long, default_value_t = false)]
        include_l2: bool,
        /// Seed for randomized sub-tasks (kept for determinism of sweeps).
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Predict the splitting of a unit-disk Dirichlet eigenvalue under
    /// removal of a scaled hole at a point.
    Predict {
        /// 1-based spectral index of the unperturbed eigenvalue.
        #[arg(long, default_value_t = 1)]
        index: usize,
        /// Alternative mode selection by K:N:cos|sin triple.
        #[arg(long)]
        mode: Option<String>,
        /// Hole shape; defaults to the unit circle.
        #[arg(long, default_value = "circle:1.0")]
        hole: String,
        /// Concentration point x,y inside the disk.
        #[arg(long, default_value = "0,0")]
        x0: String,
        /// Hole sizes for branch sampling.
        #[arg(long, default_value = "dyadic:0.1:6")]
        eps: String,
        #[arg(long, default_value_t = 256)]
        nodes: usize,
        /// Taylor degree used on the eigenfunction side.
        #[arg(long, default_value_t = 8)]
        degree: usize,
        #[arg(long)]
        out: Option<String>,
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Run the acceptance criteria suite.
    Validate {
        #[arg(long, default_value = "quick")]
        level: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fault injection hook for self-tests (e.g. elliptic-ck).
        #[arg(long)]
        inject_fault: Option<String>,
        /// Write the machine-readable summary to this path.
        #[arg(long)]
        out: Option<String>,
    },
}

fn emit(text: &str, out: &Option<String>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Io(_) | Error::Json(_) | Error::InvalidCurve(_) => 2,
        _ => 3,
    }
}

fn run() -> Result<u8, Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Capacity {
            omega,
            hole,
            germ_a,
            germ_b,
            eps,
            nodes,
            order,
            out,
            format,
            include_l2,
            seed: _,
        } => {
            let format: OutputFormat = format.parse()?;
            let omega = parse_curve_arg(&omega)?;
            let hole = parse_curve_arg(&hole)?;
            let germ_a = parse_germ_arg(&germ_a)?;
            let germ_b = match germ_b {
                Some(s) => parse_germ_arg(&s)?,
                None => germ_a.clone(),
            };
            if include_l2 && !matches!(omega.shape(), perfcap::geometry::ShapeInfo::Circle { .. }) {
                return Err(Error::Config(
                    "--include-l2 requires a disk outer domain".into(),
                ));
            }
            let cfg = CapacityConfig {
                omega,
                hole,
                germ_a,
                germ_b,
                eps: parse_eps_arg(&eps)?,
                nodes,
                order,
            };
            let result = run_capacity(&cfg)?;
            emit(&result.emit(format)?, &out)?;
            Ok(0)
        }
        Command::Predict {
            index,
            mode,
            hole,
            x0,
            eps,
            nodes,
            degree,
            out,
            format,
        } => {
            let format: OutputFormat = format.parse()?;
            let cfg = PredictConfig {
                index,
                mode,
                hole: parse_curve_arg(&hole)?,
                x0: parse_point_arg(&x0)?,
                eps: parse_eps_arg(&eps)?,
                nodes,
                degree,
            };
            let result = run_predict(&cfg)?;
            emit(&result.emit(format)?, &out)?;
            Ok(0)
        }
        Command::Validate {
            level,
            seed,
            inject_fault,
            out,
        } => {
            let level = match level.as_str() {
                "quick" => Level::Quick,
                "full" => Level::Full,
                other => {
                    return Err(Error::Config(format!(
                        "unknown level {other:?}; use quick or full"
                    )))
                }
            };
            let fault = match inject_fault.as_deref() {
                None => None,
                Some("elliptic-ck") => Some(Fault::EllipticCk),
                Some(other) => return Err(Error::Config(format!("unknown fault {other:?}"))),
            };
            let summary = run_all(level, seed, fault)?;
            print!("{}", summary.render(level));
            if let Some(path) = out {
                std::fs::write(path, serde_json::to_string_pretty(&summary)?)?;
            }
            Ok(if summary.all_pass { 0 } else { 4 })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
