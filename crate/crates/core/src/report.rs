// SPDX-License-Identifier: Apache-2.0

//! Scenario files and the reports built from engine results.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Deserialize;
use thiserror::Error;

use crate::engine::{CostBreakdown, EngineResult, HistoryEntry};
use crate::ingest::{IngestError, PlatformModel};
use crate::ir::BlockId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("percent reduction is undefined for a zero baseline")]
pub struct ZeroBaseline;

/// Cycle reduction in percent, truncated toward zero at one decimal.
///
/// Returned in tenths of a percent so that the value is exact: `783` means
/// 78.3 %. Negative when `final_cycles > initial`.
pub fn pct_reduction_tenths(initial: u64, final_cycles: u64) -> Result<i64, ZeroBaseline> {
    if initial == 0 {
        return Err(ZeroBaseline);
    }
    let diff = i128::from(initial) - i128::from(final_cycles);
    // i128 division truncates toward zero.
    Ok((diff * 1000 / i128::from(initial)) as i64)
}

/// [`pct_reduction_tenths`] as a float percentage.
pub fn pct_reduction(initial: u64, final_cycles: u64) -> Result<f64, ZeroBaseline> {
    pct_reduction_tenths(initial, final_cycles).map(|t| t as f64 / 10.0)
}

fn format_tenths(t: i64) -> String {
    let sign = if t < 0 { "-" } else { "" };
    format!("{sign}{}.{}", t.unsigned_abs() / 10, t.unsigned_abs() % 10)
}

/// One platform configuration to evaluate.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub label: String,
    pub platform: PlatformModel,
    /// Timing constraint in FPGA cycles.
    pub constraint: u64,
}

/// Parses a JSON array of scenarios. Labels must be unique.
pub fn parse_scenarios(bytes: &[u8]) -> Result<Vec<Scenario>, IngestError> {
    let scenarios: Vec<Scenario> = crate::ingest::from_json(bytes)?;
    let mut seen = BTreeSet::new();
    for (i, s) in scenarios.iter().enumerate() {
        s.platform.validate().map_err(|e| match e {
            IngestError::Range { field, message } => {
                IngestError::Range { field: format!("[{i}].platform.{field}"), message }
            }
            other => other,
        })?;
        if !seen.insert(s.label.as_str()) {
            return Err(IngestError::Schema {
                field: format!("[{i}].label"),
                message: format!("duplicate scenario label `{}`", s.label),
            });
        }
    }
    Ok(scenarios)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportRow {
    pub label: String,
    pub initial_cycles: u64,
    pub cycles_in_cgc: u64,
    pub moved_bbs: Vec<BlockId>,
    pub final_cycles: u64,
    /// Tenths of a percent; see [`pct_reduction_tenths`].
    pub pct_reduction_tenths: i64,
    pub constraint_met: bool,
}

impl ReportRow {
    pub fn from_result(label: &str, result: &EngineResult, constraint: u64) -> Result<Self, ZeroBaseline> {
        Self::from_history(label, &result.baseline, &result.history, constraint)
    }

    /// Rebuilds a row from the baseline and move history alone.
    pub fn from_history(
        label: &str,
        baseline: &CostBreakdown,
        history: &[HistoryEntry],
        constraint: u64,
    ) -> Result<Self, ZeroBaseline> {
        let last = history.last().map_or(baseline, |h| &h.cost);
        Ok(ReportRow {
            label: label.to_string(),
            initial_cycles: baseline.t_total(),
            cycles_in_cgc: last.t_coarse(),
            moved_bbs: history.iter().map(|h| h.moved).collect(),
            final_cycles: last.t_total(),
            pct_reduction_tenths: pct_reduction_tenths(baseline.t_total(), last.t_total())?,
            constraint_met: last.t_total() <= constraint,
        })
    }

    pub fn pct_reduction(&self) -> f64 {
        self.pct_reduction_tenths as f64 / 10.0
    }

    /// `true` when the partitioned design is slower than the baseline.
    pub fn is_regression(&self) -> bool {
        self.pct_reduction_tenths < 0 || self.final_cycles > self.initial_cycles
    }

    fn moved_joined(&self) -> String {
        self.moved_bbs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
    }
}

pub const REPORT_COLUMNS: [&str; 7] =
    ["label", "initial_cycles", "cycles_in_cgc", "moved_bbs", "final_cycles", "pct_reduction", "constraint_met"];

/// Report TSV; rows are written in label order.
pub fn render_tsv(rows: &[ReportRow]) -> String {
    let mut rows: Vec<&ReportRow> = rows.iter().collect();
    rows.sort_by(|a, b| a.label.cmp(&b.label));
    let mut out = REPORT_COLUMNS.join("\t");
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.label,
            r.initial_cycles,
            r.cycles_in_cgc,
            r.moved_joined(),
            r.final_cycles,
            format_tenths(r.pct_reduction_tenths),
            r.constraint_met
        );
    }
    out
}

/// Human-readable table with one column per scenario.
pub fn render_table(rows: &[ReportRow]) -> String {
    let mut rows: Vec<&ReportRow> = rows.iter().collect();
    rows.sort_by(|a, b| a.label.cmp(&b.label));
    let mut lines: Vec<(&str, Vec<String>)> = vec![
        ("", rows.iter().map(|r| r.label.clone()).collect()),
        ("Initial cycles", rows.iter().map(|r| r.initial_cycles.to_string()).collect()),
        ("Cycles in CGC", rows.iter().map(|r| r.cycles_in_cgc.to_string()).collect()),
        (
            "BB no.",
            rows.iter().map(|r| r.moved_bbs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")).collect(),
        ),
        ("Final cycles", rows.iter().map(|r| r.final_cycles.to_string()).collect()),
        ("% cycles reduction", rows.iter().map(|r| format_tenths(r.pct_reduction_tenths)).collect()),
        ("Constraint met", rows.iter().map(|r| if r.constraint_met { "yes" } else { "NO" }.to_string()).collect()),
    ];
    let head = lines.iter().map(|(h, _)| h.len()).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..rows.len()).map(|c| lines.iter().map(|(_, cells)| cells[c].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for (h, cells) in lines.iter_mut() {
        let _ = write!(out, "{h:<head$}");
        for (cell, w) in cells.iter().zip(&widths) {
            let _ = write!(out, "  {cell:>w$}");
        }
        out.push('\n');
    }
    out
}

/// Per-move history as CSV: step 0 is the all fine-grain baseline.
pub fn render_history_csv(results: &[(&str, &EngineResult)]) -> String {
    let mut results = results.to_vec();
    results.sort_by(|a, b| a.0.cmp(b.0));
    let mut out = String::from("label,step,moved_bb,t_fpga,t_coarse,t_comm,t_total\n");
    for (label, r) in results {
        let mut row = |step: usize, moved: String, c: &CostBreakdown| {
            let _ =
                writeln!(out, "{label},{step},{moved},{},{},{},{}", c.t_fpga(), c.t_coarse(), c.t_comm(), c.t_total());
        };
        row(0, String::new(), &r.baseline);
        for (i, h) in r.history.iter().enumerate() {
            row(i + 1, h.moved.to_string(), &h.cost);
        }
    }
    out
}
