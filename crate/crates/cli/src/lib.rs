//! The `pathwise` command-line tool: `fit`, `plot` and `bench`.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;
pub mod svg;

use std::io::Write;

pub use args::{Cli, Command};
pub use error::CliError;

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Fit(a) => commands::fit::run(a, out),
        Command::Plot(a) => commands::plot::run(a, out),
        Command::Bench(a) => commands::bench::run(a, out),
    }
}
