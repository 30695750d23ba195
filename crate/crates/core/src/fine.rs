// SPDX-License-Identifier: Apache-2.0

//! Temporal partitioning onto the fine-grain (FPGA) fabric.
//!
//! Operations are visited level by level in ASAP order, ascending id within a
//! level, and packed greedily into the current configuration until the next
//! one would overflow the effective area `A_FPGA`; at that point a new
//! configuration is opened and the operation starts it.
//!
//! Timing: inside a configuration the operations of one ASAP level run in
//! parallel and levels run back to back, so a configuration costs the sum over
//! its occupied levels of the slowest operation at that level. Each
//! configuration also pays one full reconfiguration, the first included.
//! Values crossing between configurations go through shared memory; that
//! traffic is folded into `t_reconfig`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};

use thiserror::Error;

use crate::cost::{self, CostError};
use crate::ingest::{PlatformModel, ProfileData};
use crate::ir::{AsapLevels, BlockId, Dfg, OpId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FineGrainError {
    #[error("operation {op} needs area {size} but A_FPGA is {a_fpga}")]
    OpExceedsFpga { op: OpId, size: f64, a_fpga: f64 },
}

/// One configuration of the fine-grain fabric.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalPartition {
    /// Operations in traversal order.
    pub ops: Vec<OpId>,
    pub area: f64,
    /// FPGA cycles, reconfiguration excluded.
    pub latency: u64,
}

/// Result of partitioning one DFG. Partition indices are 1-based.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TemporalPartitioning {
    pub partition_of: BTreeMap<OpId, u32>,
    /// `partitions[p - 1]` is partition `p`.
    pub partitions: Vec<TemporalPartition>,
}

impl TemporalPartitioning {
    /// Zero only for an empty DFG.
    pub fn partition_count(&self) -> u32 {
        self.partitions.len() as u32
    }

    pub fn partition(&self, index: u32) -> &TemporalPartition {
        &self.partitions[index as usize - 1]
    }

    /// TSV dump with the columns `op_id, asap_level, partition, area`; one row
    /// per operation in traversal order, `area` being the operation's own area.
    pub fn write_tsv<W: Write>(
        &self,
        dfg: &Dfg,
        levels: &AsapLevels,
        platform: &PlatformModel,
        mut out: W,
    ) -> io::Result<()> {
        writeln!(out, "op_id\tasap_level\tpartition\tarea")?;
        for (i, part) in self.partitions.iter().enumerate() {
            for &id in &part.ops {
                let area = dfg.op(id).map_or(0.0, |op| platform.op_area(op.kind));
                writeln!(out, "{id}\t{}\t{}\t{area}", levels.of(id), i + 1)?;
            }
        }
        Ok(())
    }
}

/// Greedy level-order packing of `dfg` into configurations that fit
/// `platform.effective_area()`.
pub fn temporal_partition(
    dfg: &Dfg,
    levels: &AsapLevels,
    platform: &PlatformModel,
) -> Result<TemporalPartitioning, FineGrainError> {
    let a_fpga = platform.effective_area();
    let kind_of: BTreeMap<OpId, _> = dfg.ops.iter().map(|op| (op.id, op.kind)).collect();
    if let Some(op) = dfg.ops.iter().find(|op| platform.op_area(op.kind) > a_fpga) {
        return Err(FineGrainError::OpExceedsFpga { op: op.id, size: platform.op_area(op.kind), a_fpga });
    }

    let mut result = TemporalPartitioning::default();
    let mut current = TemporalPartition { ops: Vec::new(), area: 0.0, latency: 0 };
    // Slowest op of the current level within the current partition.
    let mut level_max = 0u64;

    for ids in levels.by_level() {
        for id in ids {
            let kind = kind_of[&id];
            let size = platform.op_area(kind);
            if current.area + size <= a_fpga {
                current.area += size;
            } else {
                current.latency += level_max;
                level_max = 0;
                result.partitions.push(std::mem::replace(
                    &mut current,
                    TemporalPartition { ops: Vec::new(), area: size, latency: 0 },
                ));
            }
            current.ops.push(id);
            level_max = level_max.max(platform.op_latency(kind));
            result.partition_of.insert(id, result.partitions.len() as u32 + 1);
        }
        current.latency += level_max;
        level_max = 0;
    }
    if !current.ops.is_empty() {
        result.partitions.push(current);
    }
    Ok(result)
}

/// Per-invocation time of one block: every partition's latency plus one
/// reconfiguration per partition.
pub fn fpga_block_time(tp: &TemporalPartitioning, platform: &PlatformModel) -> u64 {
    tp.partitions.iter().map(|p| p.latency + platform.t_reconfig).sum()
}

/// `t_FPGA = Σ t_to_FPGA(BB) · Iter(BB)` over the fine-grain blocks.
pub fn fpga_total_time(
    assignment: &BTreeSet<BlockId>,
    per_block: &BTreeMap<BlockId, u64>,
    profile: &ProfileData,
) -> Result<u64, CostError> {
    cost::weighted_time(assignment, per_block, profile)
}
