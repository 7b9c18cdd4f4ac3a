//! Command-line front end: argument parsing, manifests, suites and reports.

pub mod commands;
pub mod manifest;
pub mod report;
pub mod suites;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};

use clap::Parser;
use fracpoin::Error;

use crate::commands::{execute, Cli};

/// Exit status for an error: bad input or resources give 2, numerical failure gives 1.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Iteration { .. } | Error::Inconclusive(_) => 1,
        _ => 2,
    }
}

/// Parse `args`, run, print, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            log::warn!("thread pool already set: {e}");
        }
    }
    match catch_unwind(AssertUnwindSafe(|| execute(&cli))) {
        Ok(Ok(out)) => {
            let _ = writeln!(std::io::stdout().lock(), "{}", out.stdout);
            if out.pass {
                0
            } else {
                1
            }
        }
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
        Err(_) => {
            eprintln!("error: internal failure");
            1
        }
    }
}
