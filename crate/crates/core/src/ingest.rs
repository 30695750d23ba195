// SPDX-License-Identifier: Apache-2.0

//! Readers for the three input documents (CDFG, profile, platform) and the
//! trace replayer that stands in for counter instrumentation.
//!
//! All documents are JSON. Syntax problems surface as [`IngestError::Parse`]
//! with a line and column; well-formed JSON with a missing or ill-typed field
//! surfaces as [`IngestError::Schema`] carrying the path of the field.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::{validate_cdfg, BasicBlock, BlockId, Cdfg, ControlEdge, Dfg, OpId, OpKind, Operation, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema error at `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("value out of range for `{field}`: {message}")]
    Range { field: String, message: String },
    #[error("invalid CDFG: {}", join_violations(.0))]
    Validation(Vec<Violation>),
    #[error("profile references unknown block {0}")]
    UnknownBlock(BlockId),
    #[error("trace steps from block {0} to block {1} without a control edge")]
    IllegalTransition(BlockId, BlockId),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl IngestError {
    fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        IngestError::Schema { field: field.into(), message: message.into() }
    }

    fn range(field: impl Into<String>, message: impl Into<String>) -> Self {
        IngestError::Range { field: field.into(), message: message.into() }
    }
}

/// Deserializes `bytes`, mapping serde failures onto parse/schema errors.
pub(crate) fn from_json<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, IngestError> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        if is_syntax(&inner) {
            return parse_error(&inner);
        }
        let message = inner.to_string();
        // serde reports a missing field at its parent; name the field itself.
        let field = match missing_field_name(&message) {
            Some(name) if path == "." => name.to_string(),
            Some(name) => format!("{path}.{name}"),
            None => path,
        };
        IngestError::schema(field, message)
    })?;
    de.end().map_err(|e| parse_error(&e))?;
    Ok(value)
}

fn is_syntax(err: &serde_json::Error) -> bool {
    err.is_syntax() || err.is_eof() || err.is_io()
}

fn parse_error(err: &serde_json::Error) -> IngestError {
    IngestError::Parse { line: err.line(), column: err.column(), message: err.to_string() }
}

fn missing_field_name(message: &str) -> Option<&str> {
    let rest = message.strip_prefix("missing field `")?;
    rest.split('`').next()
}

fn check_version(version: Option<u32>) -> Result<(), IngestError> {
    match version {
        None | Some(1) => Ok(()),
        Some(v) => Err(IngestError::schema("version", format!("unsupported version {v}, expected 1"))),
    }
}

// ---------------------------------------------------------------------------
// CDFG document

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CdfgDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    version: Option<u32>,
    blocks: Vec<BlockDoc>,
    control_edges: Vec<ControlEdgeDoc>,
    entry: BlockId,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockDoc {
    bb_id: BlockId,
    loop_depth: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    in_loop: Option<bool>,
    ops: Vec<Operation>,
    edges: Vec<(OpId, OpId)>,
}

/// `[src, dst]` or `[src, dst, words]`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ControlEdgeDoc {
    Plain(BlockId, BlockId),
    Weighted(BlockId, BlockId, u64),
}

/// Parses and validates a CDFG document.
pub fn parse_cdfg(bytes: &[u8]) -> Result<Cdfg, IngestError> {
    let doc: CdfgDoc = from_json(bytes)?;
    check_version(doc.version)?;
    let blocks = doc
        .blocks
        .into_iter()
        .map(|b| BasicBlock {
            id: b.bb_id,
            in_loop: b.in_loop.unwrap_or(b.loop_depth > 0),
            loop_depth: b.loop_depth,
            dfg: Dfg::new(b.ops, b.edges),
        })
        .collect();
    let control_edges = doc
        .control_edges
        .into_iter()
        .map(|e| match e {
            ControlEdgeDoc::Plain(src, dst) => ControlEdge { src, dst, words: 1 },
            ControlEdgeDoc::Weighted(src, dst, words) => ControlEdge { src, dst, words },
        })
        .collect();
    let cdfg = Cdfg { blocks, control_edges, entry: doc.entry };
    let violations = validate_cdfg(&cdfg);
    if !violations.is_empty() {
        return Err(IngestError::Validation(violations));
    }
    Ok(cdfg)
}

/// Serializes a CDFG in the document format accepted by [`parse_cdfg`].
pub fn serialize_cdfg(cdfg: &Cdfg) -> String {
    let doc = CdfgDoc {
        version: Some(1),
        blocks: cdfg
            .blocks
            .iter()
            .map(|b| BlockDoc {
                bb_id: b.id,
                loop_depth: b.loop_depth,
                in_loop: (b.in_loop != (b.loop_depth > 0)).then_some(b.in_loop),
                ops: b.dfg.ops.clone(),
                edges: b.dfg.edges.clone(),
            })
            .collect(),
        control_edges: cdfg
            .control_edges
            .iter()
            .map(|e| match e.words {
                1 => ControlEdgeDoc::Plain(e.src, e.dst),
                w => ControlEdgeDoc::Weighted(e.src, e.dst, w),
            })
            .collect(),
        entry: cdfg.entry,
    };
    serde_json::to_string_pretty(&doc).expect("CDFG document always serializes")
}

// ---------------------------------------------------------------------------
// Profile

/// Per-block execution counts, `Iter(BB)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProfileData {
    pub iter: BTreeMap<BlockId, u64>,
}

impl ProfileData {
    /// Execution count of `bb`; blocks never seen run zero times.
    pub fn count(&self, bb: BlockId) -> u64 {
        self.iter.get(&bb).copied().unwrap_or(0)
    }

    fn zeroed(cdfg: &Cdfg) -> Self {
        ProfileData { iter: cdfg.block_ids().map(|id| (id, 0)).collect() }
    }

    /// Profile from explicit counts; every CDFG block gets an entry.
    pub fn from_counts(cdfg: &Cdfg, counts: impl IntoIterator<Item = (BlockId, u64)>) -> Result<Self, IngestError> {
        let mut profile = Self::zeroed(cdfg);
        for (bb, n) in counts {
            match profile.iter.get_mut(&bb) {
                Some(slot) => *slot = n,
                None => return Err(IngestError::UnknownBlock(bb)),
            }
        }
        Ok(profile)
    }
}

/// Sequence of blocks visited during one representative run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace(pub Vec<BlockId>);

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    #[serde(default)]
    version: Option<u32>,
    #[serde(default)]
    counts: Option<BTreeMap<String, u64>>,
    #[serde(default)]
    trace: Option<Vec<BlockId>>,
}

/// Parsed profile document, before it is tied to a CDFG.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProfileSource {
    Counts(BTreeMap<BlockId, u64>),
    Trace(Trace),
}

pub fn parse_profile_source(bytes: &[u8]) -> Result<ProfileSource, IngestError> {
    let doc: ProfileDoc = from_json(bytes)?;
    check_version(doc.version)?;
    match (doc.counts, doc.trace) {
        (Some(counts), None) => {
            let mut out = BTreeMap::new();
            for (key, n) in counts {
                let id: u32 = key
                    .trim()
                    .parse()
                    .map_err(|_| IngestError::schema(format!("counts.{key}"), "block id must be an integer"))?;
                out.insert(BlockId(id), n);
            }
            Ok(ProfileSource::Counts(out))
        }
        (None, Some(trace)) => Ok(ProfileSource::Trace(Trace(trace))),
        (Some(_), Some(_)) => Err(IngestError::schema("counts", "give either `counts` or `trace`, not both")),
        (None, None) => Err(IngestError::schema("counts", "missing `counts` or `trace`")),
    }
}

/// Parses a profile document against `cdfg`. A trace document is replayed.
pub fn parse_profile(bytes: &[u8], cdfg: &Cdfg) -> Result<ProfileData, IngestError> {
    match parse_profile_source(bytes)? {
        ProfileSource::Counts(counts) => ProfileData::from_counts(cdfg, counts),
        ProfileSource::Trace(trace) => replay_trace(&trace, cdfg),
    }
}

/// Counts block visits along `trace`, rejecting steps that do not follow a
/// control edge.
pub fn replay_trace(trace: &Trace, cdfg: &Cdfg) -> Result<ProfileData, IngestError> {
    let mut profile = ProfileData::zeroed(cdfg);
    for (i, &bb) in trace.0.iter().enumerate() {
        if i > 0 {
            let prev = trace.0[i - 1];
            if !cdfg.has_control_edge(prev, bb) {
                return Err(IngestError::IllegalTransition(prev, bb));
            }
        }
        *profile.iter.get_mut(&bb).ok_or(IngestError::UnknownBlock(bb))? += 1;
    }
    Ok(profile)
}

// ---------------------------------------------------------------------------
// Platform

/// Per-kind table used for operation area and FPGA latency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerKind<T> {
    #[serde(rename = "ALU")]
    pub alu: T,
    #[serde(rename = "MUL")]
    pub mul: T,
}

impl<T: Copy> PerKind<T> {
    pub fn get(&self, kind: OpKind) -> T {
        match kind {
            OpKind::Alu => self.alu,
            OpKind::Mul => self.mul,
        }
    }
}

pub const DEFAULT_UTILIZATION: f64 = 0.7;
pub const DEFAULT_CLOCK_RATIO: u64 = 3;

fn default_utilization() -> f64 {
    DEFAULT_UTILIZATION
}

fn default_clock_ratio() -> u64 {
    DEFAULT_CLOCK_RATIO
}

/// Target platform: fine-grain area/timing, CGC array shape, memory cost and
/// the clock ratio between the two fabrics. All times are FPGA cycles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformModel {
    pub a_fpga_total: f64,
    /// Usable fraction of the total area, in (0, 1].
    #[serde(default = "default_utilization")]
    pub utilization: f64,
    pub op_area: PerKind<f64>,
    /// Cycles charged for each full reconfiguration.
    pub t_reconfig: u64,
    pub fpga_op_latency: PerKind<u64>,
    /// T_FPGA / T_CGC.
    #[serde(default = "default_clock_ratio")]
    pub clock_ratio: u64,
    pub cgc_count: u32,
    pub cgc_rows: u32,
    pub cgc_cols: u32,
    pub mem_word_cost: u64,
}

impl PlatformModel {
    /// Effective fine-grain area budget `A_FPGA`.
    pub fn effective_area(&self) -> f64 {
        self.a_fpga_total * self.utilization
    }

    pub fn op_area(&self, kind: OpKind) -> f64 {
        self.op_area.get(kind)
    }

    pub fn op_latency(&self, kind: OpKind) -> u64 {
        self.fpga_op_latency.get(kind)
    }

    /// Checks value ranges that the type system does not.
    pub fn validate(&self) -> Result<(), IngestError> {
        if !(self.a_fpga_total.is_finite() && self.a_fpga_total > 0.0) {
            return Err(IngestError::range("a_fpga_total", "must be a positive finite number"));
        }
        if !(self.utilization > 0.0 && self.utilization <= 1.0) {
            return Err(IngestError::range("utilization", format!("{} is outside (0, 1]", self.utilization)));
        }
        for kind in OpKind::ALL {
            let area = self.op_area(kind);
            if !(area.is_finite() && area > 0.0) {
                return Err(IngestError::range(format!("op_area.{kind}"), "must be a positive finite number"));
            }
            if self.op_latency(kind) == 0 {
                return Err(IngestError::range(format!("fpga_op_latency.{kind}"), "must be at least 1"));
            }
        }
        if self.clock_ratio == 0 {
            return Err(IngestError::range("clock_ratio", "must be at least 1"));
        }
        for (name, v) in [("cgc_count", self.cgc_count), ("cgc_rows", self.cgc_rows), ("cgc_cols", self.cgc_cols)] {
            if v == 0 {
                return Err(IngestError::range(name, "must be at least 1"));
            }
        }
        Ok(())
    }
}

pub fn parse_platform(bytes: &[u8]) -> Result<PlatformModel, IngestError> {
    let platform: PlatformModel = from_json(bytes)?;
    platform.validate()?;
    Ok(platform)
}
