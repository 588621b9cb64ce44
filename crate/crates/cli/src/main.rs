//! `cascade3`: command-line front end for the cascade3 library.
//!
//! Every subcommand reads an optional JSON config, applies flag and
//! environment overrides, writes its results into `--out` and finishes with
//! a `manifest.json` that echoes the resolved config. Feeding a manifest
//! back through `--config` reproduces the run.

mod ghz;
mod io;
mod jsa;
mod opo;
mod qpm;
mod svg;

use cascade3_core::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cascade3", version, about = "Cascaded three-photon down-conversion toolkit")]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
pub struct Common {
    /// JSON config or a manifest from an earlier run.
    #[arg(long, global = true, env = "CASCADE3_CONFIG")]
    pub config: Option<PathBuf>,

    /// Output directory (created if missing).
    #[arg(long, global = true, env = "CASCADE3_OUT", default_value = "cascade3-out")]
    pub out: PathBuf,

    #[arg(long, global = true, env = "CASCADE3_FORMAT", value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[arg(long, global = true, env = "CASCADE3_SEED")]
    pub seed: Option<u64>,

    /// Also write SVG plots next to the data files.
    #[arg(long, global = true, env = "CASCADE3_SVG")]
    pub svg: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Coupling sweeps and grating design for layered crystals.
    Qpm,
    /// Joint spectral amplitude on a grid plus Schmidt analysis.
    Jsa {
        /// Print the factorization residuals r12, r13, r23.
        #[arg(long)]
        check_heralding: bool,
    },
    /// Cavity OPO dynamics: photon numbers, g3, P(n) and Wigner grids.
    Opo(opo::OpoArgs),
    /// Discrete-mode triplet and GHZ states.
    Ghz,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Qpm => qpm::run(&cli.common),
        Command::Jsa { check_heralding } => jsa::run(&cli.common, *check_heralding),
        Command::Opo(args) => opo::run(&cli.common, args),
        Command::Ghz => ghz::run(&cli.common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::ResourceGuard(_) = e {
                eprintln!("hint: rerun with `--method trajectories` (or drop `--oracle`)");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
