//! `qcmap` command-line front end.

mod args;
mod output;
mod run;

use std::process::ExitCode;

use clap::Parser;
use qcmap::{MapError, ParseError};

use crate::output::Status;

/// Usage or configuration problem.
const EXIT_USAGE: u8 = 2;
/// Numerical non-convergence.
const EXIT_NUMERICAL: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<ParseError>().is_some() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<MapError>() {
            return match e {
                MapError::QuadratureNonConvergence { .. }
                | MapError::InversionFailed(_)
                | MapError::TooManyFailures { .. }
                | MapError::SingularJet { .. }
                | MapError::Extraction(_) => EXIT_NUMERICAL,
                _ => EXIT_USAGE,
            };
        }
    }
    EXIT_USAGE
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(text) = std::env::var("QCMAP_THREADS") {
        let n: usize = text.parse().map_err(|_| anyhow::anyhow!("QCMAP_THREADS={text:?} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    let result = configure_threads().and_then(|()| {
        let (doc, out) = run::run(&cli.command)?;
        doc.write(out)?;
        Ok(doc.summary.status)
    });
    match result {
        Ok(Status::Violated) => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
