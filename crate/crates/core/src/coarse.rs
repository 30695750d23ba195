// SPDX-License-Identifier: Apache-2.0

//! List scheduling and binding onto the coarse-grain data-path.
//!
//! The data-path is `k` coarse-grain components (CGCs), each an `n × m` array
//! of nodes. A node executes one ALU or MUL operation per CGC cycle. Inside a
//! CGC the steering logic lets a row feed any later row in the same cycle, so
//! a dependent pair such as multiply-then-add can complete in one cycle as
//! long as the consumer sits in a strictly lower row of the same CGC. Every
//! CGC invocation has unit delay.
//!
//! The scheduler is a cycle-by-cycle list scheduler. Ready operations are
//! prioritised by the length of their longest path to a sink (critical path
//! first), ties going to the smaller id. Within a cycle the highest-priority
//! operation that can legally be placed goes first; fresh operations take the
//! lowest free row (spreading across CGCs before descending), and chained
//! operations take the lowest free row below their same-cycle producers.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{self, Write};

use crate::cost::{self, CostError};
use crate::ingest::{PlatformModel, ProfileData};
use crate::ir::{BlockId, Dfg, IrError, OpId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CgcArray {
    /// Number of CGCs, `k`.
    pub count: u32,
    /// Rows per CGC, `n`; also the maximum chaining depth.
    pub rows: u32,
    /// Columns per CGC, `m`.
    pub cols: u32,
}

impl CgcArray {
    pub fn new(count: u32, rows: u32, cols: u32) -> Option<Self> {
        (count >= 1 && rows >= 1 && cols >= 1).then_some(CgcArray { count, rows, cols })
    }

    pub fn of(platform: &PlatformModel) -> Self {
        CgcArray { count: platform.cgc_count, rows: platform.cgc_rows, cols: platform.cgc_cols }
    }

    pub fn slots_per_cgc(&self) -> u32 {
        self.rows * self.cols
    }
}

/// Position of an operation inside the data-path. All fields are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CgcSlot {
    pub cgc: u32,
    pub row: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CgcSchedule {
    /// CGC cycle of each operation, from 1.
    pub cycle_of: BTreeMap<OpId, u32>,
    pub cgc_of: BTreeMap<OpId, CgcSlot>,
    /// Length of the schedule in CGC cycles; 0 for an empty DFG.
    pub latency_cgc_cycles: u32,
}

impl CgcSchedule {
    /// TSV dump with the columns `op_id, cycle, cgc, row, col`, ordered by
    /// cycle and then slot.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "op_id\tcycle\tcgc\trow\tcol")?;
        let mut rows: Vec<_> = self.cycle_of.iter().map(|(&id, &cycle)| (cycle, self.cgc_of[&id], id)).collect();
        rows.sort();
        for (cycle, slot, id) in rows {
            writeln!(out, "{id}\t{cycle}\t{}\t{}\t{}", slot.cgc, slot.row, slot.col)?;
        }
        Ok(())
    }
}

/// Number of operations on the longest path from each op to a sink, the op
/// itself included.
fn path_to_sink(dfg: &Dfg, index: &HashMap<OpId, usize>) -> Result<Vec<u32>, IrError> {
    let n = dfg.ops.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut outdegree = vec![0usize; n];
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(p, c) in &dfg.edges {
        let (Some(&pi), Some(&ci)) = (index.get(&p), index.get(&c)) else {
            return Err(IrError::UnknownOp { producer: p, consumer: c });
        };
        succ[pi].push(ci);
        pred[ci].push(pi);
        outdegree[pi] += 1;
    }
    let mut len = vec![1u32; n];
    let mut stack: Vec<usize> = (0..n).filter(|&i| outdegree[i] == 0).collect();
    let mut visited = 0;
    while let Some(u) = stack.pop() {
        visited += 1;
        for &p in &pred[u] {
            len[p] = len[p].max(len[u] + 1);
            outdegree[p] -= 1;
            if outdegree[p] == 0 {
                stack.push(p);
            }
        }
    }
    if visited != n {
        return Err(IrError::CyclicGraph);
    }
    Ok(len)
}

/// Schedules and binds `dfg` onto `array`. Any acyclic DFG is schedulable;
/// limited capacity only stretches the latency.
pub fn schedule_cgc(dfg: &Dfg, array: CgcArray) -> Result<CgcSchedule, IrError> {
    let n = dfg.ops.len();
    let index: HashMap<OpId, usize> = dfg.ops.iter().enumerate().map(|(i, op)| (op.id, i)).collect();
    let priority = path_to_sink(dfg, &index)?;
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(p, c) in &dfg.edges {
        preds[index[&c]].push(index[&p]);
    }

    // Candidate order: critical path first, then ascending id.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| priority[b].cmp(&priority[a]).then(dfg.ops[a].id.cmp(&dfg.ops[b].id)));

    let k = array.count as usize;
    let rows = array.rows as usize;
    let mut placed: Vec<Option<(u32, CgcSlot)>> = vec![None; n];
    let mut remaining = n;
    let mut cycle = 0u32;

    while remaining > 0 {
        cycle += 1;
        // occupancy[cgc][row] = columns used this cycle.
        let mut occupancy = vec![vec![0u32; rows]; k];
        loop {
            let pick = order
                .iter()
                .filter(|&&i| placed[i].is_none())
                .find_map(|&i| place(&preds[i], &placed, cycle, &occupancy, array).map(|slot| (i, slot)));
            let Some((i, slot)) = pick else { break };
            occupancy[slot.cgc as usize - 1][slot.row as usize - 1] += 1;
            placed[i] = Some((cycle, slot));
            remaining -= 1;
        }
        debug_assert!(
            placed.iter().any(|p| matches!(p, Some((c, _)) if *c == cycle)) || remaining == 0,
            "no progress in cycle {cycle}"
        );
    }

    let mut schedule = CgcSchedule { latency_cgc_cycles: cycle, ..Default::default() };
    for (op, p) in dfg.ops.iter().zip(placed) {
        let (c, slot) = p.expect("every op is placed");
        schedule.cycle_of.insert(op.id, c);
        schedule.cgc_of.insert(op.id, slot);
    }
    Ok(schedule)
}

/// Legal slot for an op in `cycle`, or `None` if it has to wait.
fn place(
    preds: &[usize],
    placed: &[Option<(u32, CgcSlot)>],
    cycle: u32,
    occupancy: &[Vec<u32>],
    array: CgcArray,
) -> Option<CgcSlot> {
    // Same-cycle producers pin the op to their CGC, below their lowest row.
    let mut pinned: Option<(u32, u32)> = None;
    for &p in preds {
        let (c, slot) = placed[p]?;
        if c == cycle {
            match pinned {
                Some((cgc, _)) if cgc != slot.cgc => return None,
                Some((cgc, row)) => pinned = Some((cgc, row.max(slot.row))),
                None => pinned = Some((slot.cgc, slot.row)),
            }
        }
    }
    let free = |cgc: u32, row: u32| {
        let used = occupancy[cgc as usize - 1][row as usize - 1];
        (used < array.cols).then_some(CgcSlot { cgc, row, col: used + 1 })
    };
    match pinned {
        Some((cgc, row)) => (row + 1..=array.rows).find_map(|r| free(cgc, r)),
        None => (1..=array.rows).find_map(|r| (1..=array.count).find_map(|g| free(g, r))),
    }
}

/// Per-invocation time in FPGA cycles: `ceil(latency / clock_ratio)`.
pub fn coarse_block_time(schedule: &CgcSchedule, platform: &PlatformModel) -> u64 {
    u64::from(schedule.latency_cgc_cycles).div_ceil(platform.clock_ratio)
}

/// `t_coarse = Σ t_to_coarse(BB) · Iter(BB)` over the coarse-grain blocks.
pub fn coarse_total_time(
    assignment: &BTreeSet<BlockId>,
    per_block: &BTreeMap<BlockId, u64>,
    profile: &ProfileData,
) -> Result<u64, CostError> {
    cost::weighted_time(assignment, per_block, profile)
}
