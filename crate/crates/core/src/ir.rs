// SPDX-License-Identifier: Apache-2.0

//! Graph intermediate representation: operations, per-block data-flow graphs,
//! basic blocks and the control data flow graph that connects them.
//!
//! The types here are plain immutable data. Structural checks live in
//! [`validate_cdfg`], which reports every violation it finds instead of
//! stopping at the first one, and [`compute_asap`] produces the longest-path
//! leveling that both mappers consume.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of an operation, unique inside its DFG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OpId(pub u32);

/// Identifier of a basic block, unique inside its CDFG. Treated as an opaque label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockId(pub u32);

impl fmt::Display for OpId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Operation class. Division and other kinds are not part of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OpKind {
    #[serde(rename = "ALU")]
    Alu,
    #[serde(rename = "MUL")]
    Mul,
}

impl OpKind {
    pub const ALL: [OpKind; 2] = [OpKind::Alu, OpKind::Mul];

    pub fn as_str(self) -> &'static str {
        match self {
            OpKind::Alu => "ALU",
            OpKind::Mul => "MUL",
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Operation {
    pub id: OpId,
    pub kind: OpKind,
    /// Informational only; does not enter any cost.
    pub bit_width: u32,
}

impl Operation {
    pub fn new(id: u32, kind: OpKind) -> Self {
        Operation { id: OpId(id), kind, bit_width: 32 }
    }
}

/// Data-flow graph of one basic block. Edges are `(producer, consumer)` pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dfg {
    pub ops: Vec<Operation>,
    pub edges: Vec<(OpId, OpId)>,
}

impl Dfg {
    pub fn new(ops: Vec<Operation>, edges: Vec<(OpId, OpId)>) -> Self {
        Dfg { ops, edges }
    }

    /// Builds a DFG from `(id, kind)` pairs and raw id edges.
    pub fn from_parts(ops: &[(u32, OpKind)], edges: &[(u32, u32)]) -> Self {
        Dfg {
            ops: ops.iter().map(|&(id, kind)| Operation::new(id, kind)).collect(),
            edges: edges.iter().map(|&(p, c)| (OpId(p), OpId(c))).collect(),
        }
    }

    /// Node count `N`.
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn op(&self, id: OpId) -> Option<&Operation> {
        self.ops.iter().find(|op| op.id == id)
    }

    /// Predecessor lists keyed by consumer, in edge order.
    pub fn predecessors(&self) -> HashMap<OpId, Vec<OpId>> {
        let mut preds: HashMap<OpId, Vec<OpId>> = HashMap::new();
        for &(p, c) in &self.edges {
            preds.entry(c).or_default().push(p);
        }
        preds
    }

    /// Successor lists keyed by producer, in edge order.
    pub fn successors(&self) -> HashMap<OpId, Vec<OpId>> {
        let mut succs: HashMap<OpId, Vec<OpId>> = HashMap::new();
        for &(p, c) in &self.edges {
            succs.entry(p).or_default().push(c);
        }
        succs
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicBlock {
    pub id: BlockId,
    pub dfg: Dfg,
    pub in_loop: bool,
    pub loop_depth: u32,
}

impl BasicBlock {
    /// A block whose `in_loop` flag follows from its loop depth.
    pub fn new(id: u32, loop_depth: u32, dfg: Dfg) -> Self {
        BasicBlock { id: BlockId(id), dfg, in_loop: loop_depth > 0, loop_depth }
    }
}

/// Control-flow edge. `words` is the number of data words handed over when
/// control passes along the edge; it only matters when the edge crosses the
/// fine/coarse boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ControlEdge {
    pub src: BlockId,
    pub dst: BlockId,
    pub words: u64,
}

impl ControlEdge {
    pub fn new(src: u32, dst: u32) -> Self {
        ControlEdge { src: BlockId(src), dst: BlockId(dst), words: 1 }
    }

    pub fn with_words(mut self, words: u64) -> Self {
        self.words = words;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cdfg {
    pub blocks: Vec<BasicBlock>,
    pub control_edges: Vec<ControlEdge>,
    pub entry: BlockId,
}

impl Cdfg {
    pub fn block(&self, id: BlockId) -> Option<&BasicBlock> {
        self.blocks.iter().find(|b| b.id == id)
    }

    pub fn block_ids(&self) -> impl Iterator<Item = BlockId> + '_ {
        self.blocks.iter().map(|b| b.id)
    }

    pub fn has_control_edge(&self, src: BlockId, dst: BlockId) -> bool {
        self.control_edges.iter().any(|e| e.src == src && e.dst == dst)
    }
}

/// One structural problem found by [`validate_cdfg`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Violation {
    DuplicateBlockId {
        bb: BlockId,
    },
    DuplicateOpId {
        bb: BlockId,
        op: OpId,
    },
    DanglingDfgEdge {
        bb: BlockId,
        producer: OpId,
        consumer: OpId,
    },
    CycleInDfg {
        bb: BlockId,
    },
    ZeroBitWidth {
        bb: BlockId,
        op: OpId,
    },
    LoopDepthWithoutLoop {
        bb: BlockId,
    },
    /// A control edge names this block, which does not exist.
    DanglingControlEdge {
        bb: BlockId,
    },
    BadEntry {
        bb: BlockId,
    },
}

impl Violation {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Violation::DuplicateBlockId { .. } => "duplicate-block-id",
            Violation::DuplicateOpId { .. } => "duplicate-op-id",
            Violation::DanglingDfgEdge { .. } => "dangling-dfg-edge",
            Violation::CycleInDfg { .. } => "cycle-in-dfg",
            Violation::ZeroBitWidth { .. } => "zero-bit-width",
            Violation::LoopDepthWithoutLoop { .. } => "loop-depth-without-loop",
            Violation::DanglingControlEdge { .. } => "dangling-control-edge",
            Violation::BadEntry { .. } => "bad-entry",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateBlockId { bb } => write!(f, "{}: block {bb}", self.code()),
            Violation::DuplicateOpId { bb, op } => write!(f, "{}: block {bb}, op {op}", self.code()),
            Violation::DanglingDfgEdge { bb, producer, consumer } => {
                write!(f, "{}: block {bb}, edge {producer}->{consumer}", self.code())
            }
            Violation::CycleInDfg { bb } => write!(f, "{}: block {bb}", self.code()),
            Violation::ZeroBitWidth { bb, op } => write!(f, "{}: block {bb}, op {op}", self.code()),
            Violation::LoopDepthWithoutLoop { bb } => write!(f, "{}: block {bb}", self.code()),
            Violation::DanglingControlEdge { bb } => write!(f, "{}: block {bb}", self.code()),
            Violation::BadEntry { bb } => write!(f, "{}: block {bb}", self.code()),
        }
    }
}

/// Checks every structural invariant of the CDFG and its DFGs.
///
/// Violations are data: an empty list means the graph is well formed. The
/// result is ordered by discovery (blocks in document order, then control
/// edges, then the entry).
pub fn validate_cdfg(cdfg: &Cdfg) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen_blocks = HashSet::new();
    for bb in &cdfg.blocks {
        if !seen_blocks.insert(bb.id) {
            out.push(Violation::DuplicateBlockId { bb: bb.id });
        }
        if bb.loop_depth > 0 && !bb.in_loop {
            out.push(Violation::LoopDepthWithoutLoop { bb: bb.id });
        }
        validate_dfg(bb.id, &bb.dfg, &mut out);
    }

    let mut dangling = BTreeSet::new();
    for e in &cdfg.control_edges {
        for end in [e.src, e.dst] {
            if !seen_blocks.contains(&end) && dangling.insert(end) {
                out.push(Violation::DanglingControlEdge { bb: end });
            }
        }
    }
    if !seen_blocks.contains(&cdfg.entry) {
        out.push(Violation::BadEntry { bb: cdfg.entry });
    }
    out
}

fn validate_dfg(bb: BlockId, dfg: &Dfg, out: &mut Vec<Violation>) {
    let mut ids = HashSet::new();
    for op in &dfg.ops {
        if !ids.insert(op.id) {
            out.push(Violation::DuplicateOpId { bb, op: op.id });
        }
        if op.bit_width == 0 {
            out.push(Violation::ZeroBitWidth { bb, op: op.id });
        }
    }
    let mut dangling = false;
    for &(p, c) in &dfg.edges {
        if !ids.contains(&p) || !ids.contains(&c) {
            out.push(Violation::DanglingDfgEdge { bb, producer: p, consumer: c });
            dangling = true;
        }
    }
    if !dangling && matches!(compute_asap(dfg), Err(IrError::CyclicGraph)) {
        out.push(Violation::CycleInDfg { bb });
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IrError {
    #[error("data-flow graph contains a cycle")]
    CyclicGraph,
    #[error("edge {producer}->{consumer} references an unknown operation")]
    UnknownOp { producer: OpId, consumer: OpId },
}

/// ASAP level of every operation. Sources sit at level 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsapLevels {
    pub level: BTreeMap<OpId, u32>,
    /// Zero only for an empty DFG.
    pub max_level: u32,
}

impl AsapLevels {
    pub fn of(&self, id: OpId) -> u32 {
        self.level[&id]
    }

    /// Operations grouped by level, each group in ascending id order.
    /// Index 0 holds level 1.
    pub fn by_level(&self) -> Vec<Vec<OpId>> {
        let mut groups = vec![Vec::new(); self.max_level as usize];
        // BTreeMap iteration is already id-ascending.
        for (&id, &lvl) in &self.level {
            groups[lvl as usize - 1].push(id);
        }
        groups
    }
}

/// Longest-path leveling: `level[u] = 1` for sources, otherwise one more than
/// the deepest predecessor.
pub fn compute_asap(dfg: &Dfg) -> Result<AsapLevels, IrError> {
    let index: HashMap<OpId, usize> = dfg.ops.iter().enumerate().map(|(i, op)| (op.id, i)).collect();
    let n = dfg.ops.len();
    let mut indegree = vec![0usize; n];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(p, c) in &dfg.edges {
        let (Some(&pi), Some(&ci)) = (index.get(&p), index.get(&c)) else {
            return Err(IrError::UnknownOp { producer: p, consumer: c });
        };
        succ[pi].push(ci);
        indegree[ci] += 1;
    }

    let mut level = vec![1u32; n];
    let mut stack: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut visited = 0;
    while let Some(u) = stack.pop() {
        visited += 1;
        for &v in &succ[u] {
            level[v] = level[v].max(level[u] + 1);
            indegree[v] -= 1;
            if indegree[v] == 0 {
                stack.push(v);
            }
        }
    }
    if visited != n {
        return Err(IrError::CyclicGraph);
    }

    let max_level = level.iter().copied().max().unwrap_or(0);
    let level = dfg.ops.iter().zip(level).map(|(op, l)| (op.id, l)).collect();
    Ok(AsapLevels { level, max_level })
}
