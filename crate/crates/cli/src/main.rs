mod commands;
mod svg;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Bisimulation quotients of switched linear systems and co-safe LTL
/// synthesis/verification on top of them.
#[derive(Debug, Parser)]
#[command(name = "swbisim", version)]
struct Cli {
    #[command(flatten)]
    opts: GlobalOpts,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// LP feasibility tolerance
    #[arg(long, global = true, env = "SWBISIM_TOL_FEAS", default_value_t = 1e-9)]
    pub tol_feas: f64,
    /// Minimum slack for a set to have interior
    #[arg(long, global = true, env = "SWBISIM_TOL_STRICT", default_value_t = 1e-8)]
    pub tol_strict: f64,
    /// Sample count for sampling validators
    #[arg(long, global = true, env = "SWBISIM_SAMPLES", default_value_t = 10_000)]
    pub samples: usize,
    /// Accepted excess of the certified contraction rate over the declared one
    #[arg(long, global = true, env = "SWBISIM_RHO_TOL", default_value_t = 1e-6)]
    pub rho_tol: f64,
    /// Abort refinement beyond this many states
    #[arg(long, global = true, env = "SWBISIM_MAX_STATES", default_value_t = 1_000_000)]
    pub max_states: usize,
    /// Seed for sampling
    #[arg(long, global = true, env = "SWBISIM_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Certify the contraction rate of the Lyapunov function
    Check { problem: PathBuf },
    /// Build the quotient and write it as a dump
    Abstract {
        problem: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Largest set of initial states some switching sequence can steer to satisfy the formula
    Synthesize {
        /// Problem file or quotient dump
        input: PathBuf,
        #[arg(long)]
        formula: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Largest set of initial states satisfying the formula under every switching sequence
    Verify {
        /// Problem file or quotient dump
        input: PathBuf,
        #[arg(long)]
        formula: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a planar problem or quotient as SVG
    Plot {
        /// Problem file or quotient dump
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Highlight this slice
        #[arg(long)]
        slice: Option<usize>,
        /// Highlight the initial set of a result bundle
        #[arg(long)]
        bundle: Option<PathBuf>,
        /// Overlay the trajectory from this point, e.g. "7,-2"
        #[arg(long, allow_hyphen_values = true)]
        trajectory: Option<String>,
        /// Mode names for the trajectory, comma separated; defaults to the synthesized sequence
        #[arg(long)]
        sequence: Option<String>,
        #[arg(long)]
        formula: Option<String>,
    },
    /// Simulate from a point under a given or synthesized switching sequence
    Simulate {
        /// Problem file or quotient dump
        input: PathBuf,
        /// Initial point, e.g. "7,-2"
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        /// Mode names, comma separated
        #[arg(long)]
        sequence: Option<String>,
        #[arg(long)]
        formula: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let o = &cli.opts;
    let result = match cli.cmd {
        Command::Check { problem } => commands::check(&problem, o),
        Command::Abstract { problem, out } => commands::abstract_cmd(&problem, out.as_deref(), o),
        Command::Synthesize { input, formula, out } => {
            commands::analyze(&input, formula.as_deref(), out.as_deref(), false, o)
        }
        Command::Verify { input, formula, out } => {
            commands::analyze(&input, formula.as_deref(), out.as_deref(), true, o)
        }
        Command::Plot {
            input,
            out,
            slice,
            bundle,
            trajectory,
            sequence,
            formula,
        } => commands::plot(
            &input,
            &out,
            slice,
            bundle.as_deref(),
            trajectory.as_deref(),
            sequence.as_deref(),
            formula.as_deref(),
            o,
        ),
        Command::Simulate {
            input,
            x0,
            sequence,
            formula,
        } => commands::simulate(&input, &x0, sequence.as_deref(), formula.as_deref(), o),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
