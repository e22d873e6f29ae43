use std::process::ExitCode;

use bsingular::cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    run(Cli::parse())
}
