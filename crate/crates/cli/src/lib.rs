//! Command-line driver: model statistics, solving, export, verification,
//! rendering and transform cost counting.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod render;

use std::ffi::OsString;

use clap::Parser;

use args::{Cli, Command};
use commands::TransformArgs;
use error::CliResult;

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Stats {
            problem,
            out,
            build_limit,
        } => commands::cmd_stats(&problem, &out.out, build_limit),
        Command::Solve {
            problem,
            formulation,
            mps,
            solver,
            out,
        } => commands::cmd_solve(&problem, formulation, mps.as_deref(), &solver, &out.out),
        Command::Export {
            problem,
            formulation,
            free,
            mps,
            out,
        } => commands::cmd_export(&problem, formulation, free, mps.as_deref(), &out.out),
        Command::Render {
            problem,
            solution,
            size,
            log_floor,
            out,
        } => commands::cmd_render(&problem, &solution, size, log_floor, &out.out),
        Command::Transform {
            scheme,
            input,
            factors,
            dx,
            dxi,
            spectrum_len,
            out,
        } => commands::cmd_transform(&TransformArgs {
            scheme: &scheme,
            input: &input,
            factors: factors.as_deref(),
            dx,
            dxi,
            spectrum_len,
            out: &out.out,
        })
        .map(|_| ()),
        Command::Verify {
            problem,
            solution,
            out,
        } => commands::cmd_verify(&problem, &solution, &out.out),
    }
}

/// Parses `args` (program name first) and runs the subcommand; returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
