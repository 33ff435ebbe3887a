//! Command-line pipeline around `tlvnet-core`: configuration, case-data
//! ingestion, file formats and the `tlvnet` subcommands.
//!
//! Exit status: 0 on success, 2 for usage errors, 3 for invalid input or
//! configuration, 4 for failures during computation or output.

pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod io;
pub mod report;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

pub use commands::Cli;
pub use config::PipelineConfig;
pub use error::{CliError, CliResult};

/// Parse `args` (including the program name), run, and return the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => CliError::Usage(String::new()).exit_code(),
            };
        }
    };
    match commands::execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("tlvnet: {e}");
            e.exit_code()
        }
    }
}
