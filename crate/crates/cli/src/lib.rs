//! Batch front end for `eslab-core`: argument parsing, sieve caching, scans and
//! CSV/JSON reports.

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::ffi::OsString;

pub use commands::{execute, run_scan, Output};
pub use config::{parse_config, Format, RunConfig};
pub use error::{CliError, CliResult};
pub use report::{emit_report, Report, ReportRow, Value};

/// Parses, runs and writes the report; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_config(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    for note in config.notes() {
        eprintln!("{note}");
    }
    let result = execute(&config).and_then(|out| {
        let path = config.out.as_deref();
        match out {
            Output::Json(text) => report::write_output(text.as_bytes(), path).map(|_| 0),
            Output::Report(r) => {
                emit_report(&r, config.format, path, true)?;
                Ok(if r.error.is_some() { 1 } else { 0 })
            }
        }
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
