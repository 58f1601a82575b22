use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ffopt::mask_lp::Formulation;

#[derive(Debug, Parser)]
#[command(
    name = "ffopt",
    version,
    about = "Transform counting and apodized-pupil LP design"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Mask problem parameters; flags override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ProblemArgs {
    /// Pupil half-resolution.
    #[arg(long)]
    pub n: Option<usize>,
    /// Focal-plane resolution.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub rho0: Option<f64>,
    #[arg(long)]
    pub rho1: Option<f64>,
    #[arg(long)]
    pub contrast: Option<f64>,
    /// key=value file with any of n, m, rho0, rho1, contrast.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 300)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub gap_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub feas_tol: f64,
    #[arg(long, default_value_t = 0.95)]
    pub step_fraction: f64,
    /// Added to the diagonal of every Newton system.
    #[arg(long, default_value_t = 0.0)]
    pub diag_reg: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Model sizes of both formulations and predicted transform costs.
    Stats {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Largest predicted nonzero count that is built rather than estimated.
        #[arg(long, default_value_t = 30_000_000)]
        build_limit: usize,
    },
    /// Solve a mask model, or an MPS file with --mps.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value = "twostep")]
        formulation: Formulation,
        #[arg(long)]
        mps: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Write a mask model as MPS.
    Export {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value = "twostep")]
        formulation: Formulation,
        /// Free-format MPS with unabridged names.
        #[arg(long)]
        free: bool,
        /// Output file; defaults to <out>/<formulation>.mps.
        #[arg(long)]
        mps: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Mask and point-spread-function images of a solution.
    Render {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        solution: PathBuf,
        /// Odd side length of the PSF images.
        #[arg(long, default_value_t = 201)]
        size: usize,
        /// Log-stretch floor, as a power of ten of intensity.
        #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
        log_floor: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run one transform scheme on a CSV signal and report its cost.
    Transform {
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        input: PathBuf,
        /// Two-step factors `N0,N1,M0,M1`; chosen automatically if absent.
        #[arg(long)]
        factors: Option<String>,
        #[arg(long)]
        dx: Option<f64>,
        #[arg(long)]
        dxi: Option<f64>,
        /// Spectrum length; defaults to the signal length.
        #[arg(long)]
        spectrum_len: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Check a solution against the direct transform.
    Verify {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        solution: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
}
