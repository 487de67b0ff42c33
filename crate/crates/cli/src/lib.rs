//! Command-line front end of the `nondegen` verification toolkit.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;

pub use commands::{check_names, execute, CommandOutput};
pub use config::{Cli, Command, CommandKind, Format, RunConfig};
pub use error::{CliError, EXIT_CONFIG, EXIT_FAIL, EXIT_INTERNAL, EXIT_PASS};
pub use report::{CheckEntry, ParamValue, Report, Table, SCHEMA};

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match run_cli(&cli) {
        Ok(report) => {
            if report.verdict {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command line: writes the report and table, prints the summary.
pub fn run_cli(cli: &Cli) -> Result<Report, CliError> {
    let cfg = RunConfig::from_command(&cli.command)?;
    let keep_time = !cli.command.args().no_timestamp;
    let output = execute(&cfg)?;
    let report = build_report(cfg, &output, keep_time);
    for line in report.summary() {
        eprintln!("{line}");
    }
    if let Some(k) = report.normalization {
        eprintln!("normalization kappa_audit={k:.12e}");
    }
    eprintln!("verdict: {}", if report.verdict { "PASS" } else { "FAIL" });
    let text = match report.config.format {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv()?,
    };
    let stdout = std::io::stdout();
    match (&report.config.out, &output.table) {
        (Some(path), _) => std::fs::write(path, &text).map_err(|e| io_error(path, e))?,
        (None, None) => stdout
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| io_error("stdout", e))?,
        (None, Some(_)) => {}
    }
    if let Some(table) = &output.table {
        table.write_csv(stdout.lock())?;
    }
    Ok(report)
}

fn io_error(path: &str, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_string(),
        source,
    }
}

/// Assembles the report; `keep_time = false` drops the timestamp and wall times.
pub fn build_report(config: RunConfig, output: &CommandOutput, keep_time: bool) -> Report {
    let checks: Vec<CheckEntry> = output
        .records
        .iter()
        .map(|r| CheckEntry::from_record(r, keep_time))
        .collect();
    let verdict = !checks.is_empty() && checks.iter().all(|c| c.pass);
    let timestamp = keep_time
        .then(|| SystemTime::now().duration_since(UNIX_EPOCH).ok())
        .flatten()
        .map(|d| d.as_secs());
    Report {
        schema: SCHEMA.to_string(),
        timestamp,
        config,
        checks,
        normalization: output.normalization.filter(|k| k.is_finite()),
        verdict,
    }
}
