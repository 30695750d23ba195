// SPDX-License-Identifier: Apache-2.0

//! Partitioning of CDFG-represented applications between the fine-grain
//! (FPGA) and coarse-grain (CGC data-path) fabrics of a hybrid reconfigurable
//! platform.
//!
//! The pipeline:
//!
//! 1. [`ingest`] reads the CDFG, the per-block execution counts and the
//!    platform model.
//! 2. [`engine::run_engine`] maps every block to the fine grain
//!    ([`fine`]) and stops if the timing constraint already holds.
//! 3. Otherwise [`analysis`] ranks the loop kernels by total weight.
//! 4. Kernels move to the coarse grain ([`coarse`]) one at a time until the
//!    constraint is met, re-evaluating `t_FPGA + t_coarse + t_comm` after each
//!    move.
//!
//! [`report`] and [`cli`] turn engine results into report files.

pub mod analysis;
pub mod cli;
pub mod coarse;
pub mod cost;
pub mod engine;
pub mod fine;
pub mod ingest;
pub mod ir;
pub mod report;

pub use analysis::{bb_weight, rank_kernels, total_weight, KernelRanking, WeightTable};
pub use coarse::{schedule_cgc, CgcArray, CgcSchedule};
pub use engine::{evaluate, run_engine, CostBreakdown, EngineOptions, EngineResult, PartitionState};
pub use fine::{temporal_partition, TemporalPartitioning};
pub use ingest::{parse_cdfg, parse_platform, parse_profile, replay_trace, PlatformModel, ProfileData, Trace};
pub use ir::{compute_asap, validate_cdfg, AsapLevels, BasicBlock, BlockId, Cdfg, ControlEdge, Dfg, OpId, OpKind};

// The guide under `book/` is compiled here so its snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/cdfg.md")]
    mod cdfg {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
    #[doc = include_str!("../../../book/src/fine-grain.md")]
    mod fine_grain {}
    #[doc = include_str!("../../../book/src/coarse-grain.md")]
    mod coarse_grain {}
    #[doc = include_str!("../../../book/src/engine.md")]
    mod engine {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
