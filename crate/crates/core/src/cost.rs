// SPDX-License-Identifier: Apache-2.0

//! Checked cycle arithmetic shared by the fine- and coarse-grain cost sums.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ingest::ProfileData;
use crate::ir::BlockId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CostError {
    #[error("cycle count overflowed 64 bits")]
    Overflow,
    #[error("no per-invocation time for block {0}")]
    MissingBlock(BlockId),
}

pub(crate) fn mul(a: u64, b: u64) -> Result<u64, CostError> {
    a.checked_mul(b).ok_or(CostError::Overflow)
}

pub(crate) fn add(a: u64, b: u64) -> Result<u64, CostError> {
    a.checked_add(b).ok_or(CostError::Overflow)
}

/// `Σ per_block[bb] · Iter(bb)` over `assignment`.
pub fn weighted_time(
    assignment: &BTreeSet<BlockId>,
    per_block: &BTreeMap<BlockId, u64>,
    profile: &ProfileData,
) -> Result<u64, CostError> {
    assignment.iter().try_fold(0u64, |acc, &bb| {
        let t = *per_block.get(&bb).ok_or(CostError::MissingBlock(bb))?;
        add(acc, mul(t, profile.count(bb))?)
    })
}
