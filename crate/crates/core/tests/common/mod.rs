// SPDX-License-Identifier: Apache-2.0

//! Generators and independent oracles shared by the integration tests.
//!
//! Nothing in here calls into the library's algorithms: levels, partitions
//! and schedule optima are recomputed from scratch so that the tests compare
//! two separate implementations.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;

use hypart::coarse::CgcSchedule;
use hypart::ingest::PerKind;
use hypart::ir::Operation;
use hypart::{BasicBlock, BlockId, Cdfg, CgcArray, ControlEdge, Dfg, OpId, OpKind, PlatformModel, ProfileData};
use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

/// Random DAG with `n` ops. Edges only go from lower to higher position in a
/// hidden topological order; ids are a random sample so they carry no order.
pub fn random_dfg(rng: &mut ChaCha8Rng, n: usize, edge_prob: f64) -> Dfg {
    let mut ids: Vec<u32> = (1..=(n as u32 * 4).max(1)).collect();
    ids.shuffle(rng);
    ids.truncate(n);
    let mut ops: Vec<Operation> = ids
        .iter()
        .map(|&id| {
            let kind = if rng.random_bool(0.3) { OpKind::Mul } else { OpKind::Alu };
            Operation::new(id, kind)
        })
        .collect();
    let mut edges = Vec::new();
    for j in 0..n {
        for i in 0..j {
            if rng.random_bool(edge_prob) {
                edges.push((OpId(ids[i]), OpId(ids[j])));
            }
        }
    }
    ops.shuffle(rng);
    edges.shuffle(rng);
    Dfg::new(ops, edges)
}

/// Random DFG of up to `max_nodes` ops with roughly `avg_fan_in` predecessors
/// per op.
pub fn random_sparse_dfg(rng: &mut ChaCha8Rng, max_nodes: usize, avg_fan_in: f64) -> Dfg {
    let n = rng.random_range(1..=max_nodes);
    let p = if n > 1 { (2.0 * avg_fan_in / n as f64).min(1.0) } else { 0.0 };
    random_dfg(rng, n, p)
}

pub fn platform(a_fpga: f64, alu_area: f64, mul_area: f64, t_reconfig: u64) -> PlatformModel {
    PlatformModel {
        a_fpga_total: a_fpga,
        utilization: 1.0,
        op_area: PerKind { alu: alu_area, mul: mul_area },
        t_reconfig,
        fpga_op_latency: PerKind { alu: 1, mul: 3 },
        clock_ratio: 3,
        cgc_count: 2,
        cgc_rows: 2,
        cgc_cols: 2,
        mem_word_cost: 1,
    }
}

/// Random CDFG with `blocks` blocks, a ring of control edges plus some extra
/// edges, and a random profile. Every op fits `platform` when its area
/// budget is at least 8.
pub fn random_cdfg(rng: &mut ChaCha8Rng, blocks: u32) -> (Cdfg, ProfileData) {
    let mut bbs = Vec::new();
    for id in 1..=blocks {
        let depth = if rng.random_bool(0.6) { rng.random_range(1..=3) } else { 0 };
        let n = if rng.random_bool(0.15) { 0 } else { rng.random_range(1..=16) };
        let dfg = random_dfg(rng, n, 0.25);
        bbs.push(BasicBlock::new(id, depth, dfg));
    }
    let mut control_edges = Vec::new();
    for id in 1..blocks {
        control_edges.push(ControlEdge::new(id, id + 1).with_words(rng.random_range(0..=4)));
    }
    for _ in 0..blocks {
        let s = rng.random_range(1..=blocks);
        let d = rng.random_range(1..=blocks);
        control_edges.push(ControlEdge::new(s, d).with_words(rng.random_range(0..=4)));
    }
    let cdfg = Cdfg { blocks: bbs, control_edges, entry: BlockId(1) };
    let counts: Vec<(BlockId, u64)> = (1..=blocks).map(|id| (BlockId(id), rng.random_range(0..=2000))).collect();
    let profile = ProfileData::from_counts(&cdfg, counts).expect("all blocks exist");
    (cdfg, profile)
}

/// ASAP levels by direct longest-path recursion over predecessors.
pub fn oracle_levels(dfg: &Dfg) -> BTreeMap<OpId, u32> {
    let mut preds: HashMap<OpId, Vec<OpId>> = HashMap::new();
    for &(p, c) in &dfg.edges {
        preds.entry(c).or_default().push(p);
    }
    fn level(id: OpId, preds: &HashMap<OpId, Vec<OpId>>, memo: &mut HashMap<OpId, u32>) -> u32 {
        if let Some(&l) = memo.get(&id) {
            return l;
        }
        let l = 1 + preds.get(&id).map_or(0, |ps| ps.iter().map(|&p| level(p, preds, memo)).max().unwrap_or(0));
        memo.insert(id, l);
        l
    }
    let mut memo = HashMap::new();
    dfg.ops.iter().map(|op| (op.id, level(op.id, &preds, &mut memo))).collect()
}

/// Level of every op as the number of ops on the longest path ending there,
/// found by enumerating every path from every source. Exponential; only for
/// tiny graphs.
pub fn brute_force_levels(dfg: &Dfg) -> BTreeMap<OpId, u32> {
    let mut succ: HashMap<OpId, Vec<OpId>> = HashMap::new();
    let mut has_pred = BTreeSet::new();
    for &(p, c) in &dfg.edges {
        succ.entry(p).or_default().push(c);
        has_pred.insert(c);
    }
    let mut best: BTreeMap<OpId, u32> = dfg.ops.iter().map(|op| (op.id, 0)).collect();
    fn walk(id: OpId, len: u32, succ: &HashMap<OpId, Vec<OpId>>, best: &mut BTreeMap<OpId, u32>) {
        let b = best.get_mut(&id).unwrap();
        *b = (*b).max(len);
        for &s in succ.get(&id).map(Vec::as_slice).unwrap_or(&[]) {
            walk(s, len + 1, succ, best);
        }
    }
    for op in &dfg.ops {
        if !has_pred.contains(&op.id) {
            walk(op.id, 1, &succ, &mut best);
        }
    }
    best
}

/// The fine-grain mapping pseudocode, transcribed statement by statement.
/// Nodes of one level are visited in ascending id order.
pub fn transcribed_partition(dfg: &Dfg, size: impl Fn(OpKind) -> f64, a_fpga: f64) -> BTreeMap<OpId, u32> {
    let level_of = oracle_levels(dfg);
    let max_level = level_of.values().copied().max().unwrap_or(0);
    let mut partition = BTreeMap::new();

    let mut i = 1u32;
    let mut level = 1u32;
    let mut area_covered = 0.0f64;
    while level <= max_level {
        let mut nodes: Vec<&Operation> = dfg.ops.iter().filter(|u| level_of[&u.id] == level).collect();
        nodes.sort_by_key(|u| u.id);
        for u in nodes {
            let current_area = size(u.kind);
            if area_covered + current_area <= a_fpga {
                partition.insert(u.id, i);
                area_covered += current_area;
            } else {
                i += 1;
                partition.insert(u.id, i);
                area_covered = current_area;
            }
        }
        level += 1;
    }
    partition
}

/// Checks the four partitioning invariants: every op assigned once, each
/// partition within `a_fpga`, indices 1..=count all used, and indices never
/// decreasing along the level-then-id traversal.
pub fn check_partition_invariants(
    dfg: &Dfg,
    partition_of: &BTreeMap<OpId, u32>,
    partition_count: u32,
    size: impl Fn(OpKind) -> f64,
    a_fpga: f64,
) -> Result<(), String> {
    if partition_of.len() != dfg.ops.len() || dfg.ops.iter().any(|op| !partition_of.contains_key(&op.id)) {
        return Err("assignment is not total".into());
    }
    let mut area: BTreeMap<u32, f64> = BTreeMap::new();
    for op in &dfg.ops {
        *area.entry(partition_of[&op.id]).or_default() += size(op.kind);
    }
    if let Some((p, a)) = area.iter().find(|(_, &a)| a > a_fpga + 1e-9) {
        return Err(format!("partition {p} has area {a} > {a_fpga}"));
    }
    let used: Vec<u32> = area.keys().copied().collect();
    if used != (1..=partition_count).collect::<Vec<_>>() {
        return Err(format!("indices {used:?} are not 1..={partition_count}"));
    }
    let levels = oracle_levels(dfg);
    let mut order: Vec<(u32, OpId)> = levels.iter().map(|(&id, &l)| (l, id)).collect();
    order.sort();
    let seq: Vec<u32> = order.iter().map(|(_, id)| partition_of[id]).collect();
    if seq.windows(2).any(|w| w[1] < w[0]) {
        return Err("partition index decreases along the traversal".into());
    }
    Ok(())
}

/// Every structural property a CGC schedule must have, plus both latency
/// lower bounds.
pub fn check_schedule(dfg: &Dfg, array: CgcArray, s: &CgcSchedule) -> Result<(), String> {
    let n = dfg.ops.len();
    if s.cycle_of.len() != n || s.cgc_of.len() != n {
        return Err("not every op is scheduled exactly once".into());
    }
    let mut slots = BTreeSet::new();
    let mut per_row: BTreeMap<(u32, u32, u32), u32> = BTreeMap::new();
    for op in &dfg.ops {
        let c = *s.cycle_of.get(&op.id).ok_or(format!("op {} unscheduled", op.id))?;
        let slot = *s.cgc_of.get(&op.id).ok_or(format!("op {} unbound", op.id))?;
        if c == 0 || slot.cgc == 0 || slot.cgc > array.count || slot.row == 0 || slot.row > array.rows {
            return Err(format!("op {} has out-of-range placement", op.id));
        }
        if slot.col == 0 || slot.col > array.cols {
            return Err(format!("op {} in column {}", op.id, slot.col));
        }
        if !slots.insert((c, slot.cgc, slot.row, slot.col)) {
            return Err(format!("slot reused in cycle {c}"));
        }
        *per_row.entry((c, slot.cgc, slot.row)).or_default() += 1;
    }
    if let Some((key, used)) = per_row.iter().find(|(_, &u)| u > array.cols) {
        return Err(format!("{used} ops in (cycle, cgc, row) {key:?}"));
    }
    for &(p, c) in &dfg.edges {
        let (cp, cc) = (s.cycle_of[&p], s.cycle_of[&c]);
        let (sp, sc) = (s.cgc_of[&p], s.cgc_of[&c]);
        let ok = cc > cp || (cc == cp && sc.cgc == sp.cgc && sc.row > sp.row);
        if !ok {
            return Err(format!("edge {p}->{c} violated"));
        }
    }
    let max_cycle = s.cycle_of.values().copied().max().unwrap_or(0);
    if s.latency_cgc_cycles != max_cycle {
        return Err(format!("latency {} != max cycle {max_cycle}", s.latency_cgc_cycles));
    }
    let (lb_chain, lb_throughput) = lower_bounds(dfg, array);
    if s.latency_cgc_cycles < lb_chain || s.latency_cgc_cycles < lb_throughput {
        return Err(format!("latency {} below bounds ({lb_chain}, {lb_throughput})", s.latency_cgc_cycles));
    }
    Ok(())
}

/// `(ceil(max_level / rows), ceil(N / (count * rows * cols)))`.
pub fn lower_bounds(dfg: &Dfg, array: CgcArray) -> (u32, u32) {
    let max_level = oracle_levels(dfg).values().copied().max().unwrap_or(0);
    let n = dfg.ops.len() as u32;
    (max_level.div_ceil(array.rows), n.div_ceil(array.count * array.rows * array.cols))
}

/// Minimum latency over all legal schedules, by backtracking over
/// `(cycle, cgc, row)` for each op in a topological order. Columns within a
/// row are interchangeable, so only row occupancy is tracked.
pub fn exhaustive_optimum(dfg: &Dfg, array: CgcArray) -> u32 {
    let n = dfg.ops.len();
    if n == 0 {
        return 0;
    }
    let levels = oracle_levels(dfg);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (levels[&dfg.ops[i].id], dfg.ops[i].id));
    let pos: HashMap<OpId, usize> = dfg.ops.iter().enumerate().map(|(i, op)| (op.id, i)).collect();
    let mut preds = vec![Vec::new(); n];
    for &(p, c) in &dfg.edges {
        preds[pos[&c]].push(pos[&p]);
    }
    let (lb_chain, lb_thr) = lower_bounds(dfg, array);
    let mut latency = lb_chain.max(lb_thr).max(1);
    loop {
        let mut placed = vec![None; n];
        let mut occupancy = HashMap::new();
        if search(0, &order, &preds, array, latency, &mut placed, &mut occupancy) {
            return latency;
        }
        latency += 1;
    }
}

fn search(
    k: usize,
    order: &[usize],
    preds: &[Vec<usize>],
    array: CgcArray,
    latency: u32,
    placed: &mut Vec<Option<(u32, u32, u32)>>,
    occupancy: &mut HashMap<(u32, u32, u32), u32>,
) -> bool {
    let Some(&op) = order.get(k) else { return true };
    // CGCs are interchangeable: never open one beyond the highest in use.
    let max_cgc = placed.iter().flatten().map(|p| p.1).max().unwrap_or(0);
    for cycle in 1..=latency {
        for cgc in 1..=array.count.min(max_cgc + 1) {
            for row in 1..=array.rows {
                let legal = preds[op].iter().all(|&p| {
                    let (pc, pg, pr) = placed[p].expect("predecessors come first");
                    cycle > pc || (cycle == pc && cgc == pg && row > pr)
                });
                let used = occupancy.get(&(cycle, cgc, row)).copied().unwrap_or(0);
                if !legal || used >= array.cols {
                    continue;
                }
                placed[op] = Some((cycle, cgc, row));
                *occupancy.entry((cycle, cgc, row)).or_default() += 1;
                if search(k + 1, order, preds, array, latency, placed, occupancy) {
                    return true;
                }
                *occupancy.get_mut(&(cycle, cgc, row)).unwrap() -= 1;
                placed[op] = None;
            }
        }
    }
    false
}

/// Reference kernel weights: `(app, bb, exec_freq, ops_weight, total_weight)`.
pub const KERNEL_WEIGHTS: [(&str, u32, u64, u64, u64); 16] = [
    ("ofdm", 22, 336, 115, 38640),
    ("ofdm", 12, 1200, 25, 30000),
    ("ofdm", 3, 864, 6, 5184),
    ("ofdm", 5, 370, 12, 4440),
    ("ofdm", 42, 800, 5, 4000),
    ("ofdm", 32, 560, 6, 3360),
    ("ofdm", 29, 448, 7, 3136),
    ("ofdm", 21, 147, 18, 2646),
    ("jpeg", 6, 355024, 3, 1065072),
    ("jpeg", 2, 8192, 85, 696320),
    ("jpeg", 1, 8192, 83, 679936),
    ("jpeg", 22, 65536, 5, 327680),
    ("jpeg", 8, 30927, 8, 247416),
    ("jpeg", 3, 65536, 3, 196608),
    ("jpeg", 16, 63540, 3, 190620),
    ("jpeg", 17, 63540, 2, 127080),
];

/// Reference `(initial, final, expected % reduction)` pairs.
pub const REDUCTIONS: [(u64, u64, f64); 8] = [
    (263408, 57088, 78.3),
    (263408, 47856, 81.8),
    (124080, 56864, 54.1),
    (124080, 46512, 62.5),
    (18434, 10558, 42.7),
    (18434, 10411, 43.5),
    (12399, 10423, 15.9),
    (12399, 10227, 17.5),
];

pub fn load_app(app: &str) -> (Cdfg, ProfileData, Vec<hypart::report::Scenario>) {
    let read = |f: &str| std::fs::read(fixture(&format!("{app}/{f}"))).unwrap();
    let cdfg = hypart::parse_cdfg(&read("cdfg.json")).unwrap();
    let profile = hypart::parse_profile(&read("profile.json"), &cdfg).unwrap();
    let scenarios = hypart::report::parse_scenarios(&read("scenarios.json")).unwrap();
    (cdfg, profile, scenarios)
}
