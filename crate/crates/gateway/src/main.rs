use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = dspace_gateway::cli::Cli::parse();
    dspace_gateway::cli::run(cli)
}
