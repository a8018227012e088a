//! Batch front end for the `hobi-pb` solver: single solves, sphere
//! refinement sweeps against the Kirkwood solution, and worker scaling.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on usage errors.
//! Failures print one line `error[KIND]: MESSAGE` on standard error.

pub mod args;
pub mod commands;
pub mod report;

use std::fs::File;
use std::io::{self, Write};

use args::{Cli, Command, Format, OutputArgs};
use clap::Parser;
use report::{write_json, write_rows};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("cannot write report: {0}")]
    Output(String),
    #[error(transparent)]
    Solver(#[from] hobi_pb::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Solver(hobi_pb::Error::InvalidArgument(_)) => 2,
            _ => 1,
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        use hobi_pb::Error as E;
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Output(_) => "output",
            CliError::Solver(e) => match e {
                E::Parse { .. } => "parse",
                E::IndexOutOfRange { .. } | E::Validation(_) => "mesh",
                E::DegenerateGeometry(_) | E::DegenerateArc | E::Element { .. } => "geometry",
                E::Singularity => "singularity",
                E::InvalidArgument(_) => "usage",
                E::NotConverged { .. } => "not-converged",
                E::WrongOperation(_) => "wrong-operation",
            },
        }
    }
}

/// Report destination: the `--out` file or standard output.
fn sink(out: &OutputArgs) -> Result<Box<dyn Write>, CliError> {
    match &out.out {
        Some(path) => File::create(path).map(|f| Box::new(f) as Box<dyn Write>).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.3e}"))
}

fn execute(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Solve(a) => {
            let report = commands::cmd_solve(a)?;
            let mut out = sink(&a.output)?;
            match a.output.format {
                Format::Json => write_json(&report, &mut out)?,
                Format::Csv => write_rows(std::slice::from_ref(&report), Format::Csv, &mut out)?,
            }
            if a.output.out.is_some() {
                println!(
                    "scheme={} n_faces={} energy={:.4} iterations={} residual={:.2e} e_phi={}",
                    report.scheme,
                    report.n_faces,
                    report.energy,
                    report.iterations,
                    report.residual,
                    fmt_opt(report.e_phi)
                );
            }
        }
        Command::Convergence(a) => {
            let result = commands::cmd_convergence(a)?;
            let mut out = sink(&a.output)?;
            match a.output.format {
                Format::Json => write_json(&result, &mut out)?,
                Format::Csv => write_rows(&result.reports, Format::Csv, &mut out)?,
            }
            if a.output.out.is_some() {
                for r in &result.reports {
                    println!(
                        "{} {} n_faces={} e_phi={} order={} energy={:.4} iterations={}",
                        r.scheme,
                        r.mesh_source,
                        r.n_faces,
                        fmt_opt(r.e_phi),
                        r.observed_order.map_or_else(|| "-".into(), |o| format!("{o:.3}")),
                        r.energy,
                        r.iterations
                    );
                }
                for c in &result.comparisons {
                    println!("level {} lobi_more_accurate={}", c.level, c.lobi_more_accurate);
                }
            }
        }
        Command::Scaling(a) => {
            let result = commands::cmd_scaling(a)?;
            let mut out = sink(&a.output)?;
            match a.output.format {
                Format::Json => write_json(&result, &mut out)?,
                Format::Csv => write_rows(&result.rows, Format::Csv, &mut out)?,
            }
            if a.output.out.is_some() {
                for r in &result.rows {
                    println!(
                        "workers={} time={:.3}s efficiency={:.3} max_abs_diff={:.1e}",
                        r.workers, r.wall_time, r.efficiency, r.max_abs_diff
                    );
                }
            }
        }
    }
    Ok(())
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {message}", e.kind());
            e.exit_code()
        }
    }
}
