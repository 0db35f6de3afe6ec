//! Command-line front end: single approximations, parameter sweeps, random
//! batches, Bloch-sphere cross-sections and process-matrix validation.

pub mod args;
pub mod commands;
pub mod error;
pub mod record;

use std::fs::File;
use std::io::Write;

use serde_json::json;

use crate::args::{Cli, Command, OutFormat};
pub use crate::error::CliError;
use crate::record::{summarize, write_csv, RunRecord};

fn emit<W: Write>(out: &mut W, format: OutFormat, records: &[RunRecord]) -> Result<(), CliError> {
    match format {
        OutFormat::Csv => write_csv(&mut *out, records),
        OutFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, records)?;
            writeln!(out)?;
            Ok(())
        }
    }
}

/// Rows without a distance are solver failures; reported after the output
/// has been written.
fn check_failures(records: &[RunRecord]) -> Result<(), CliError> {
    let failed = records.iter().filter(|r| r.distance.is_none()).count();
    if failed > 0 {
        return Err(CliError::Solver(format!("{failed} of {} solves failed", records.len())));
    }
    Ok(())
}

/// Runs a parsed command, writing its primary output to `out`.
pub fn run<W: Write>(cli: &Cli, out: &mut W) -> Result<(), CliError> {
    match &cli.command {
        Command::Approx(a) => {
            let records = commands::approx(a)?;
            emit(out, a.out, &records)?;
            check_failures(&records)
        }
        Command::Sweep(a) => {
            let records = commands::sweep(a)?;
            emit(out, a.out, &records)?;
            check_failures(&records)
        }
        Command::Random(a) => {
            let records = commands::random(a)?;
            let summary = summarize(&records);
            match a.out {
                OutFormat::Csv => {
                    write_csv(&mut *out, &records)?;
                    let text = serde_json::to_string_pretty(&summary)?;
                    match &a.summary {
                        Some(path) => writeln!(File::create(path)?, "{text}")?,
                        None => eprintln!("{text}"),
                    }
                }
                OutFormat::Json => {
                    serde_json::to_writer_pretty(&mut *out, &json!({ "records": records, "summary": summary }))?;
                    writeln!(out)?;
                }
            }
            check_failures(&records)
        }
        Command::BlochSection(a) => {
            let rows = commands::bloch(a)?;
            let mut w = csv::Writer::from_writer(&mut *out);
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush()?;
            Ok(())
        }
        Command::Validate(a) => {
            let report = commands::validate(&a.file)?;
            serde_json::to_writer_pretty(&mut *out, &report)?;
            writeln!(out)?;
            Ok(())
        }
    }
}
