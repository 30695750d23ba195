// SPDX-License-Identifier: Apache-2.0

//! The partitioning engine.
//!
//! Starting from an all fine-grain mapping, kernels are moved to the
//! coarse-grain data-path one at a time in ranking order, and the total time
//! `t_total = t_FPGA + t_coarse + t_comm` is recomputed after every move until
//! it meets the timing constraint or the kernels run out. There is no
//! backtracking.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::analysis::{rank_kernels, KernelRanking, WeightTable};
use crate::coarse::{coarse_block_time, coarse_total_time, schedule_cgc, CgcArray};
use crate::cost::{self, CostError};
use crate::fine::{fpga_block_time, fpga_total_time, temporal_partition, FineGrainError};
use crate::ingest::{PlatformModel, ProfileData};
use crate::ir::{compute_asap, BlockId, Cdfg, IrError};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("block {bb} cannot be mapped to the fine-grain fabric: {source}")]
    InfeasibleFineGrain {
        bb: BlockId,
        #[source]
        source: FineGrainError,
    },
    #[error("the CDFG has no basic blocks")]
    EmptyCdfg,
    #[error("block {bb}: {source}")]
    Graph {
        bb: BlockId,
        #[source]
        source: IrError,
    },
    #[error("block {0} is not part of the CDFG")]
    UnknownBlock(BlockId),
    #[error(transparent)]
    Cost(#[from] CostError),
}

/// Fine/coarse assignment of every basic block.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PartitionState {
    pub coarse_set: BTreeSet<BlockId>,
    pub fine_set: BTreeSet<BlockId>,
    /// `coarse_set` in the order the blocks were moved.
    pub moved_order: Vec<BlockId>,
}

impl PartitionState {
    pub fn all_fine(cdfg: &Cdfg) -> Self {
        PartitionState { fine_set: cdfg.block_ids().collect(), ..Default::default() }
    }

    /// Moves `bb` to the coarse grain. Returns `false` if it was not fine-grain.
    pub fn move_to_coarse(&mut self, bb: BlockId) -> bool {
        if !self.fine_set.remove(&bb) {
            return false;
        }
        self.coarse_set.insert(bb);
        self.moved_order.push(bb);
        true
    }

    pub fn is_coarse(&self, bb: BlockId) -> bool {
        self.coarse_set.contains(&bb)
    }
}

/// Total time decomposition, all in FPGA cycles. `t_total` is always the exact
/// sum of the other three.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CostBreakdown {
    t_fpga: u64,
    t_coarse: u64,
    t_comm: u64,
    t_total: u64,
}

impl CostBreakdown {
    pub fn new(t_fpga: u64, t_coarse: u64, t_comm: u64) -> Result<Self, CostError> {
        let t_total = cost::add(cost::add(t_fpga, t_coarse)?, t_comm)?;
        Ok(CostBreakdown { t_fpga, t_coarse, t_comm, t_total })
    }

    pub fn t_fpga(&self) -> u64 {
        self.t_fpga
    }

    pub fn t_coarse(&self) -> u64 {
        self.t_coarse
    }

    pub fn t_comm(&self) -> u64 {
        self.t_comm
    }

    pub fn t_total(&self) -> u64 {
        self.t_total
    }
}

/// Shared-memory transfer time across the fine/coarse boundary.
///
/// Every control edge `a -> b` whose ends sit on different fabrics costs
/// `Iter(b) · words(a -> b) · mem_word_cost`: the words are written by one
/// side and read by the other once per entry into `b`.
pub fn comm_time(
    state: &PartitionState,
    cdfg: &Cdfg,
    profile: &ProfileData,
    platform: &PlatformModel,
) -> Result<u64, CostError> {
    cdfg.control_edges.iter().filter(|e| state.is_coarse(e.src) != state.is_coarse(e.dst)).try_fold(0u64, |acc, e| {
        let t = cost::mul(cost::mul(profile.count(e.dst), e.words)?, platform.mem_word_cost)?;
        cost::add(acc, t)
    })
}

/// Evaluates partition states, caching per-block mapping results.
///
/// A block's per-invocation time on either fabric does not depend on where
/// the other blocks are, so each block is mapped at most once per fabric.
pub struct Evaluator<'a> {
    cdfg: &'a Cdfg,
    profile: &'a ProfileData,
    platform: &'a PlatformModel,
    fine_time: BTreeMap<BlockId, u64>,
    coarse_time: BTreeMap<BlockId, u64>,
    evaluations: usize,
}

impl<'a> Evaluator<'a> {
    pub fn new(cdfg: &'a Cdfg, profile: &'a ProfileData, platform: &'a PlatformModel) -> Self {
        Evaluator { cdfg, profile, platform, fine_time: BTreeMap::new(), coarse_time: BTreeMap::new(), evaluations: 0 }
    }

    /// Number of [`Evaluator::evaluate`] calls so far.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// Fine-grain time of one invocation of `bb`, reconfiguration included.
    pub fn fine_block_time(&mut self, bb: BlockId) -> Result<u64, EngineError> {
        if let Some(&t) = self.fine_time.get(&bb) {
            return Ok(t);
        }
        let block = self.cdfg.block(bb).ok_or(EngineError::UnknownBlock(bb))?;
        let levels = compute_asap(&block.dfg).map_err(|source| EngineError::Graph { bb, source })?;
        let tp = temporal_partition(&block.dfg, &levels, self.platform)
            .map_err(|source| EngineError::InfeasibleFineGrain { bb, source })?;
        let t = fpga_block_time(&tp, self.platform);
        self.fine_time.insert(bb, t);
        Ok(t)
    }

    /// Coarse-grain time of one invocation of `bb`, in FPGA cycles.
    pub fn coarse_block_time(&mut self, bb: BlockId) -> Result<u64, EngineError> {
        if let Some(&t) = self.coarse_time.get(&bb) {
            return Ok(t);
        }
        let block = self.cdfg.block(bb).ok_or(EngineError::UnknownBlock(bb))?;
        let schedule = schedule_cgc(&block.dfg, CgcArray::of(self.platform))
            .map_err(|source| EngineError::Graph { bb, source })?;
        let t = coarse_block_time(&schedule, self.platform);
        self.coarse_time.insert(bb, t);
        Ok(t)
    }

    pub fn evaluate(&mut self, state: &PartitionState) -> Result<CostBreakdown, EngineError> {
        self.evaluations += 1;
        let mut fine = BTreeMap::new();
        for &bb in &state.fine_set {
            fine.insert(bb, self.fine_block_time(bb)?);
        }
        let mut coarse = BTreeMap::new();
        for &bb in &state.coarse_set {
            coarse.insert(bb, self.coarse_block_time(bb)?);
        }
        let t_fpga = fpga_total_time(&state.fine_set, &fine, self.profile)?;
        let t_coarse = coarse_total_time(&state.coarse_set, &coarse, self.profile)?;
        let t_comm = comm_time(state, self.cdfg, self.profile, self.platform)?;
        Ok(CostBreakdown::new(t_fpga, t_coarse, t_comm)?)
    }
}

/// One-shot evaluation of `state`.
pub fn evaluate(
    state: &PartitionState,
    cdfg: &Cdfg,
    profile: &ProfileData,
    platform: &PlatformModel,
) -> Result<CostBreakdown, EngineError> {
    Evaluator::new(cdfg, profile, platform).evaluate(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EngineOptions {
    /// Undo a move that makes `t_total` worse instead of keeping it.
    pub reject_regressions: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistoryEntry {
    pub moved: BlockId,
    pub cost: CostBreakdown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineResult {
    pub state: PartitionState,
    pub cost: CostBreakdown,
    pub constraint_met: bool,
    /// One entry per kept move, in move order.
    pub history: Vec<HistoryEntry>,
    /// All fine-grain cost.
    pub baseline: CostBreakdown,
    pub ranking: KernelRanking,
    pub evaluations: usize,
}

pub fn run_engine(
    cdfg: &Cdfg,
    profile: &ProfileData,
    platform: &PlatformModel,
    weights: &WeightTable,
    constraint: u64,
    options: EngineOptions,
) -> Result<EngineResult, EngineError> {
    if cdfg.blocks.is_empty() {
        return Err(EngineError::EmptyCdfg);
    }
    let mut eval = Evaluator::new(cdfg, profile, platform);
    let mut state = PartitionState::all_fine(cdfg);
    let baseline = eval.evaluate(&state)?;
    let mut cost = baseline;
    let mut history = Vec::new();
    let ranking = rank_kernels(cdfg, profile, weights)?;

    if cost.t_total() > constraint {
        for entry in &ranking.entries {
            let mut next = state.clone();
            next.move_to_coarse(entry.bb);
            let next_cost = eval.evaluate(&next)?;
            if options.reject_regressions && next_cost.t_total() > cost.t_total() {
                continue;
            }
            state = next;
            cost = next_cost;
            history.push(HistoryEntry { moved: entry.bb, cost });
            if cost.t_total() <= constraint {
                break;
            }
        }
    }

    Ok(EngineResult {
        constraint_met: cost.t_total() <= constraint,
        state,
        cost,
        history,
        baseline,
        ranking,
        evaluations: eval.evaluations(),
    })
}
