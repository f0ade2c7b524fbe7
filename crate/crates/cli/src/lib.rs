//! Command-line front end: analyses, reference tables, relaxation sweeps and golden
//! stencil maintenance.

pub mod commands;
pub mod config;
pub mod error;
pub mod render;
pub mod tables;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::Outcome;
pub use config::{Options, Settings};
pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "trilfa", version, about = "Fourier analysis and multigrid on triangular grids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Smoothing, two-grid or three-grid factor of one configuration.
    Analyze,
    /// Reproduce a reference table and check every cell.
    Table {
        #[arg(value_parser = tables::TABLE_IDS)]
        id: String,
    },
    /// Search the relaxation parameters minimising the two- or three-grid factor.
    SweepOmega,
    /// Rebuild the golden stencil files from the element assembly.
    RegenerateStencils {
        #[arg(long)]
        force: bool,
        /// Directory holding the golden files.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

/// Runs a parsed command line and writes the output to `--out` when given.
pub fn run(cli: Cli) -> Result<Outcome> {
    let options = cli.options.with_file()?;
    let settings = options.resolve()?;
    let outcome = match cli.command {
        Command::Analyze => commands::analyze(&settings)?,
        Command::Table { id } => commands::table(&id, &settings)?,
        Command::SweepOmega => commands::sweep_omega(&settings)?,
        Command::RegenerateStencils { force, dir } => {
            let dir = dir.unwrap_or_else(commands::default_stencil_dir);
            commands::regenerate_stencils(&dir, force)?
        }
    };
    if let Some(path) = &settings.out {
        std::fs::write(path, &outcome.text)?;
    }
    Ok(outcome)
}
