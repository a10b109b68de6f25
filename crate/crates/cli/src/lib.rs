//! `coindex-lab`: verify catalog spaces and model files, sample invariant metrics,
//! run the finite-difference oracle and print the admissibility table.
//!
//! The binary is a thin wrapper over [`run`], which other harnesses can call in-process.

mod args;
mod output;
mod run;

use std::ffi::OsString;

use clap::Parser;

use crate::args::Cli;

/// Exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 2;
pub const EXIT_INCONCLUSIVE: u8 = 3;
pub const EXIT_USAGE: u8 = 64;

/// Parses `args` (program name first) and runs the command, returning the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run::dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("coindex-lab: {}", e.message);
            e.code
        }
    }
}
