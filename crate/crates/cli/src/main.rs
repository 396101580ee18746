//! `hyplab`: reproducible density, construction and criterion experiments.
//!
//! Exit status: 0 success or pass, 1 fail with witness, 2 usage error,
//! 3 internal error. Errors are printed to stderr as one JSON object.

mod check;
mod config;
mod construct;
mod density;
mod error;
mod hvector;
mod orbit;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use config::{Cli, Experiment, Parameters};
use error::CliError;

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("HYPLAB_THREADS") else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::usage(format!("HYPLAB_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))
}

fn run(exp: &Experiment) -> Result<u8, CliError> {
    match &exp.parameters {
        Parameters::Density(a) => density::run(exp, a),
        Parameters::Construct(a) => construct::run(exp, a),
        Parameters::Check(a) => check::run(exp, a),
        Parameters::Orbit(a) => orbit::run(exp, a),
        Parameters::Hvector(a) => hvector::run(exp, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return CliError::usage(e.render().to_string().trim_end()).report(),
    };
    let result = init_threads().and_then(|()| config::load(cli)).and_then(|exp| run(&exp));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => e.report(),
    }
}
