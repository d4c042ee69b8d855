//! Allocation drivers and the plan file.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use super::engine::{cluster_items, AwareLinkage, Group, UpgmaLinkage};
use super::pairs::assign_pairs_ranked;
use super::refine::{file_bytes, migrate, seal, select, Migration};
use super::{AllocConfig, AllocError, AllocationPlan, Allocator, Chunk, QuarantineEntry, QuarantineReason, SealedTube};
use crate::capacity::pair_capacity_bytes;
use crate::collision::CollisionSet;

pub const PLAN_SCHEMA: &str = "plan v1";

/// Splits off chunks no tube can take. Survivors come back in chunk-id order.
fn screen<'a>(chunks: &'a [Chunk], cfg: &AllocConfig) -> (Vec<&'a Chunk>, Vec<QuarantineEntry>) {
    let mut ok = Vec::with_capacity(chunks.len());
    let mut bad = Vec::new();
    for c in chunks {
        let reason = if c.collisions.width() != cfg.library_size() {
            Some(QuarantineReason::WidthMismatch)
        } else if c.byte_len == 0 {
            Some(QuarantineReason::EmptyChunk)
        } else if !cfg.fits(c.byte_len as u64, c.collisions.count()) {
            Some(QuarantineReason::Infeasible)
        } else {
            None
        };
        match reason {
            Some(reason) => bad.push(QuarantineEntry { chunk_id: c.chunk_id, reason }),
            None => ok.push(c),
        }
    }
    ok.sort_by_key(|c| c.chunk_id);
    bad.sort_by_key(|q| q.chunk_id);
    (ok, bad)
}

fn finish(
    allocator: Allocator,
    cfg: &AllocConfig,
    mut tubes: Vec<SealedTube>,
    quarantined: Vec<QuarantineEntry>,
    placed: &[&Chunk],
) -> AllocationPlan {
    reassign_pairs(&mut tubes, placed, cfg);
    let objective = tubes.iter().map(|t| t.collided_primers as u64).sum();
    AllocationPlan { allocator, config: *cfg, library_size: cfg.library_size(), tubes, quarantined, objective }
}

/// Redoes pair assignment once every tube is known, so that when a tube has
/// to cut files it cuts those with the most room below the tube count: a
/// file of at most one pair held by `t` tubes and already cut `c` times can
/// take `tubes - t - c` more cuts before its retrieval cost exceeds the
/// number of tubes. Larger files go first.
fn reassign_pairs(tubes: &mut [SealedTube], placed: &[&Chunk], cfg: &AllocConfig) {
    let pc = pair_capacity_bytes(&cfg.params);
    let by_id: HashMap<u32, &Chunk> = placed.iter().map(|c| (c.chunk_id, *c)).collect();
    let totals = file_bytes(placed);
    let mut spread: HashMap<u32, u64> = HashMap::new();
    for t in tubes.iter() {
        for f in t.pair_assignments.keys() {
            *spread.entry(*f).or_insert(0) += 1;
        }
    }
    let count = tubes.len() as u64;
    let mut cuts: HashMap<u32, u64> = HashMap::new();
    for t in tubes.iter_mut() {
        let members: Vec<&Chunk> = t.chunks.iter().map(|id| by_id[id]).collect();
        let rank = |f: u32| {
            if totals[&f] > pc {
                u64::MAX
            } else {
                count.saturating_sub(spread[&f] + cuts.get(&f).copied().unwrap_or(0))
            }
        };
        t.pair_assignments = assign_pairs_ranked(&members, t.usable_primers, cfg, rank).expect("a feasible tube always packs into its pairs");
        for (f, slots) in &t.pair_assignments {
            let bytes: u64 = slots.iter().map(|s| s.bytes).sum();
            let extra = slots.len() as u64 - bytes.div_ceil(pc);
            if extra > 0 {
                *cuts.entry(*f).or_insert(0) += extra;
            }
        }
    }
}

fn clustered(chunks: &[Chunk], cfg: &AllocConfig, mode: Migration) -> AllocationPlan {
    let (mut pending, quarantined) = screen(chunks, cfg);
    let placed = pending.clone();
    let totals = file_bytes(&pending);
    let mut tubes = Vec::new();
    while !pending.is_empty() {
        let mut groups: Vec<Group> = match mode {
            Migration::Aware => cluster_items(&pending, cfg, AwareLinkage),
            Migration::Upgma => cluster_items(&pending, cfg, UpgmaLinkage::new(pending.len())),
        };
        let s = select(&groups, cfg);
        let mut target = groups.swap_remove(s);
        migrate(&pending, &mut target, &groups, cfg, mode);
        let tube = seal(tubes.len() as u32, &pending, &target, cfg, &totals).expect("a feasible tube always packs into its pairs");
        tubes.push(tube);
        let taken: HashSet<usize> = target.members.into_iter().collect();
        pending = pending.iter().enumerate().filter(|(i, _)| !taken.contains(i)).map(|(_, c)| *c).collect();
    }
    let allocator = match mode {
        Migration::Aware => Allocator::Aware,
        Migration::Upgma => Allocator::Upgma,
    };
    finish(allocator, cfg, tubes, quarantined, &placed)
}

/// Collision-aware allocation: cluster by merge priority, fill and seal the
/// fullest cluster, repeat on what is left.
pub fn allocate(chunks: &[Chunk], cfg: &AllocConfig) -> AllocationPlan {
    clustered(chunks, cfg, Migration::Aware)
}

/// Average-linkage baseline; same loop as [`allocate`].
pub fn allocate_upgma(chunks: &[Chunk], cfg: &AllocConfig) -> AllocationPlan {
    clustered(chunks, cfg, Migration::Upgma)
}

/// Fills tubes in chunk-id order, opening a new one when the next chunk
/// would overflow the current tube.
pub fn allocate_sequential(chunks: &[Chunk], cfg: &AllocConfig) -> AllocationPlan {
    let (pending, quarantined) = screen(chunks, cfg);
    let totals = file_bytes(&pending);
    let mut tubes = Vec::new();
    let mut cur = Group { id: 0, members: Vec::new(), union: CollisionSet::new(cfg.library_size()), bytes: 0 };
    for (i, c) in pending.iter().enumerate() {
        let inter = cur.union.intersection_count(&c.collisions).expect("screened width");
        let union = cur.union.count() + c.collisions.count() - inter;
        if !cur.members.is_empty() && !cfg.fits(cur.bytes + c.byte_len as u64, union) {
            tubes.push(seal(tubes.len() as u32, &pending, &cur, cfg, &totals).expect("a feasible tube always packs into its pairs"));
            cur = Group { id: 0, members: Vec::new(), union: CollisionSet::new(cfg.library_size()), bytes: 0 };
        }
        cur.union.union_with(&c.collisions).expect("screened width");
        cur.bytes += c.byte_len as u64;
        cur.members.push(i);
    }
    if !cur.members.is_empty() {
        tubes.push(seal(tubes.len() as u32, &pending, &cur, cfg, &totals).expect("a feasible tube always packs into its pairs"));
    }
    finish(Allocator::Sequential, cfg, tubes, quarantined, &pending)
}

pub fn allocate_with(allocator: Allocator, chunks: &[Chunk], cfg: &AllocConfig) -> AllocationPlan {
    match allocator {
        Allocator::Aware => allocate(chunks, cfg),
        Allocator::Sequential => allocate_sequential(chunks, cfg),
        Allocator::Upgma => allocate_upgma(chunks, cfg),
    }
}

#[derive(Serialize)]
struct PlanOut<'a> {
    schema: &'static str,
    #[serde(flatten)]
    plan: &'a AllocationPlan,
}

pub fn plan_to_json(plan: &AllocationPlan) -> String {
    let mut s = serde_json::to_string_pretty(&PlanOut { schema: PLAN_SCHEMA, plan }).expect("plan serializes");
    s.push('\n');
    s
}

/// Parses a plan file and checks its internal bookkeeping.
pub fn plan_from_json(text: &str) -> Result<AllocationPlan, AllocError> {
    let fmt = |e: serde_json::Error| AllocError::Format(e.to_string());
    let mut v: serde_json::Value = serde_json::from_str(text).map_err(fmt)?;
    match v.as_object_mut().and_then(|o| o.remove("schema")) {
        Some(serde_json::Value::String(s)) if s == PLAN_SCHEMA => {}
        Some(other) => return Err(AllocError::Format(format!("unsupported schema {other}"))),
        None => return Err(AllocError::Format("missing schema".into())),
    }
    let plan: AllocationPlan = serde_json::from_value(v).map_err(fmt)?;
    let bad = |m: String| Err(AllocError::Format(m));
    if plan.library_size != plan.config.params.library_size {
        return bad("library size disagrees with config".into());
    }
    let mut seen = HashSet::new();
    for t in &plan.tubes {
        if t.collided_primers + t.usable_primers != plan.library_size {
            return bad(format!("tube {}: primer counts do not add up", t.tube_id));
        }
        if t.total_bytes > t.capacity_bytes {
            return bad(format!("tube {}: over capacity", t.tube_id));
        }
        for id in &t.chunks {
            if !seen.insert(*id) {
                return bad(format!("chunk {id} appears twice"));
            }
        }
    }
    for q in &plan.quarantined {
        if !seen.insert(q.chunk_id) {
            return bad(format!("chunk {} appears twice", q.chunk_id));
        }
    }
    if plan.objective != plan.tubes.iter().map(|t| t.collided_primers as u64).sum::<u64>() {
        return bad("objective disagrees with tubes".into());
    }
    Ok(plan)
}
