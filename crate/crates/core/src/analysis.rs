// SPDX-License-Identifier: Apache-2.0

//! Static operation weighting and dynamic kernel ranking.
//!
//! A block's complexity is the weighted sum of its operations; its total
//! weight is that sum times its execution count. Loop-resident blocks with a
//! positive total weight are the kernels, ranked heaviest first.

use std::io::{self, Write};

use crate::cost::{mul, CostError};
use crate::ingest::ProfileData;
use crate::ir::{BasicBlock, BlockId, Cdfg, OpKind};

/// Per-kind operation weight. Every weight is at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightTable {
    alu: u64,
    mul: u64,
}

impl Default for WeightTable {
    /// ALU = 1, MUL = 2.
    fn default() -> Self {
        WeightTable { alu: 1, mul: 2 }
    }
}

impl WeightTable {
    /// Returns `None` if either weight is zero.
    pub fn new(alu: u64, mul: u64) -> Option<Self> {
        (alu >= 1 && mul >= 1).then_some(WeightTable { alu, mul })
    }

    pub fn weight(&self, kind: OpKind) -> u64 {
        match kind {
            OpKind::Alu => self.alu,
            OpKind::Mul => self.mul,
        }
    }
}

pub fn bb_weight(bb: &BasicBlock, weights: &WeightTable) -> u64 {
    bb.dfg.ops.iter().map(|op| weights.weight(op.kind)).sum()
}

/// `exec_freq · bb_weight`, refusing to wrap.
pub fn total_weight(exec_freq: u64, bb_weight: u64) -> Result<u64, CostError> {
    mul(exec_freq, bb_weight)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelEntry {
    pub bb: BlockId,
    pub exec_freq: u64,
    pub bb_weight: u64,
    pub total_weight: u64,
}

/// Kernels sorted by total weight, heaviest first, ties by ascending block id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KernelRanking {
    pub entries: Vec<KernelEntry>,
}

impl KernelRanking {
    pub fn order(&self) -> Vec<BlockId> {
        self.entries.iter().map(|e| e.bb).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// TSV dump with the columns `bb_id, exec_freq, bb_weight, total_weight`.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "bb_id\texec_freq\tbb_weight\ttotal_weight")?;
        for e in &self.entries {
            writeln!(out, "{}\t{}\t{}\t{}", e.bb, e.exec_freq, e.bb_weight, e.total_weight)?;
        }
        Ok(())
    }
}

pub fn rank_kernels(cdfg: &Cdfg, profile: &ProfileData, weights: &WeightTable) -> Result<KernelRanking, CostError> {
    let mut entries = Vec::new();
    for bb in cdfg.blocks.iter().filter(|b| b.in_loop) {
        let exec_freq = profile.count(bb.id);
        let w = bb_weight(bb, weights);
        let total = total_weight(exec_freq, w)?;
        if total > 0 {
            entries.push(KernelEntry { bb: bb.id, exec_freq, bb_weight: w, total_weight: total });
        }
    }
    entries.sort_by(|a, b| b.total_weight.cmp(&a.total_weight).then(a.bb.cmp(&b.bb)));
    Ok(KernelRanking { entries })
}
