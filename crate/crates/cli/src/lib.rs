//! Command-line surface for `xyqmc`: boundary solutions, orbit dumps,
//! verification suites, expectation queries and free-energy curves.
//!
//! Data goes to the writer handed to [`run`]; logs go to standard error.

pub mod args;
pub mod commands;
pub mod error;
pub mod observable_file;
pub mod output;

use std::io::Write;

pub use args::Cli;
pub use error::{CliError, Result, EXIT_CHECK, EXIT_FEASIBILITY, EXIT_OK, EXIT_USAGE};

/// Runs one subcommand. `Ok(false)` means a check exceeded its tolerance.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<bool> {
    use args::Command;
    match &cli.command {
        Command::SolveBoundary(a) => commands::solve::run(a, out),
        Command::Orbit(a) => commands::orbit::run(a, out),
        Command::Verify(a) => commands::verify::run(a, out),
        Command::Expect(a) => commands::expect::run(a, out),
        Command::FreeEnergy(a) => commands::free_energy::run(a, out),
    }
}
