mod args;
mod commands;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::args::CommonArgs;

#[derive(Debug, Parser)]
#[command(
    name = "ctrw",
    version,
    about = "Lattice CTRW schemes for space-time fractional diffusion"
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Memory weights c_l and gamma_l.
    Coeffs {
        /// Number of steps tabulated; defaults to --steps or 50.
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Jump probabilities q_k and stability bounds for the first h.
    Kernel,
    /// Run the lattice scheme at the first h and dump the final layer.
    Solve,
    /// Simulate walkers at the first h and dump the final histogram.
    Sample,
    /// Exact characteristic function and density.
    Reference {
        /// Density grid points on each side of the origin.
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Refinement study against the exact characteristic function.
    Converge,
    /// Markovian refinement study against the beta = 1 density.
    Theorem2,
    /// Refinement study with distributed-order time weights.
    Distorder,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.common, &cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err.downcast_ref::<ctrw::Error>().map_or(2, ctrw::Error::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
