// SPDX-License-Identifier: Apache-2.0

//! `hypart` command line.
//!
//! Exit codes: 0 when every scenario meets its constraint, 2 when at least one
//! does not (reports are still written), 1 on any input or I/O error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use crate::analysis::{rank_kernels, WeightTable};
use crate::engine::{run_engine, EngineOptions, EngineResult};
use crate::ingest::{parse_cdfg, parse_profile};
use crate::report::{parse_scenarios, render_history_csv, render_table, render_tsv, ReportRow};

#[derive(Debug, Parser)]
#[command(name = "hypart", version, about = "Fine/coarse-grain partitioning of CDFG applications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the partitioning engine over every scenario.
    Partition(PartitionArgs),
}

#[derive(Debug, clap::Args)]
struct PartitionArgs {
    /// CDFG document (JSON).
    #[arg(long)]
    cdfg: PathBuf,
    /// Profile document: execution counts or a block trace (JSON).
    #[arg(long)]
    profile: PathBuf,
    /// List of scenarios: label, platform, constraint (JSON).
    #[arg(long)]
    scenarios: PathBuf,
    /// Write the report as TSV.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the per-move cost history as CSV.
    #[arg(long)]
    history: Option<PathBuf>,
    /// Undo moves that increase the total time.
    #[arg(long)]
    reject_regressions: bool,
    /// Write the kernel ranking as TSV.
    #[arg(long)]
    dump_ranking: Option<PathBuf>,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CONSTRAINT: i32 = 2;

/// Runs the command line with `args` (program name first) and returns the
/// process exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Partition(args) => partition(&args, stdout),
    };
    match result {
        Ok(all_met) if all_met => EXIT_OK,
        Ok(_) => EXIT_CONSTRAINT,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            EXIT_INPUT
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn partition(args: &PartitionArgs, stdout: &mut dyn Write) -> Result<bool> {
    let cdfg = parse_cdfg(&read(&args.cdfg)?).with_context(|| args.cdfg.display().to_string())?;
    let profile = parse_profile(&read(&args.profile)?, &cdfg).with_context(|| args.profile.display().to_string())?;
    let scenarios = parse_scenarios(&read(&args.scenarios)?).with_context(|| args.scenarios.display().to_string())?;
    let weights = WeightTable::default();

    if let Some(path) = &args.dump_ranking {
        let mut buf = Vec::new();
        rank_kernels(&cdfg, &profile, &weights)?.write_tsv(&mut buf)?;
        write(path, &String::from_utf8(buf)?)?;
    }

    let options = EngineOptions { reject_regressions: args.reject_regressions };
    let mut results: Vec<(&str, EngineResult)> = Vec::new();
    let mut rows = Vec::new();
    for s in &scenarios {
        let result = run_engine(&cdfg, &profile, &s.platform, &weights, s.constraint, options)
            .with_context(|| format!("scenario `{}`", s.label))?;
        rows.push(
            ReportRow::from_result(&s.label, &result, s.constraint)
                .with_context(|| format!("scenario `{}`", s.label))?,
        );
        results.push((&s.label, result));
    }

    write!(stdout, "{}", render_table(&rows))?;
    for r in rows.iter().filter(|r| r.is_regression()) {
        writeln!(stdout, "warning: scenario `{}` ends slower than its all fine-grain baseline", r.label)?;
    }
    if let Some(path) = &args.report {
        write(path, &render_tsv(&rows))?;
    }
    if let Some(path) = &args.history {
        let refs: Vec<(&str, &EngineResult)> = results.iter().map(|(l, r)| (*l, r)).collect();
        write(path, &render_history_csv(&refs))?;
    }
    Ok(rows.iter().all(|r| r.constraint_met))
}
