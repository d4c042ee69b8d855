//! Per-file primer-pair assignment inside a sealed tube.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};

use super::{AllocConfig, AllocError, AllocationPlan, Chunk, PairAssignments, PairSlot};
use crate::capacity::pair_capacity_bytes;

struct FileGroup {
    file_id: u32,
    bytes: u64,
    /// (chunk_id, byte_len) in chunk-id order.
    chunks: Vec<(u32, u64)>,
}

/// Places each file's chunks onto primer pairs `0..usable_primers/2`.
///
/// Files go first-fit-decreasing by total bytes (ties by file id). A file
/// larger than one pair fills whole fresh pairs and places the remainder
/// first-fit. If some piece then has no pair that can hold it whole, the tube
/// is packed again pair by pair, cutting at most one file at the end of each
/// pair; no file piece is cut twice. A chunk cut this way is listed on both
/// pairs that hold part of it.
pub fn assign_pairs(tube_chunks: &[&Chunk], usable_primers: usize, cfg: &AllocConfig) -> Result<PairAssignments, AllocError> {
    assign_pairs_ranked(tube_chunks, usable_primers, cfg, |_| 0)
}

/// [`assign_pairs`] where, whenever a file has to be cut, files with a
/// higher `cut_rank` go first; rank 0 files are cut only when nothing else is
/// left to cut.
pub(crate) fn assign_pairs_ranked<F: Fn(u32) -> u64>(
    tube_chunks: &[&Chunk],
    usable_primers: usize,
    cfg: &AllocConfig,
    cut_rank: F,
) -> Result<PairAssignments, AllocError> {
    let pc = pair_capacity_bytes(&cfg.params);
    let npairs = usable_primers / 2;

    let mut by_file: BTreeMap<u32, FileGroup> = BTreeMap::new();
    for c in tube_chunks {
        let g = by_file.entry(c.file_id).or_insert_with(|| FileGroup { file_id: c.file_id, bytes: 0, chunks: Vec::new() });
        g.bytes += c.byte_len as u64;
        g.chunks.push((c.chunk_id, c.byte_len as u64));
    }
    let mut groups: Vec<FileGroup> = by_file.into_values().collect();
    for g in &mut groups {
        g.chunks.sort_unstable();
    }
    groups.sort_by(|a, b| b.bytes.cmp(&a.bytes).then(a.file_id.cmp(&b.file_id)));

    let total: u64 = groups.iter().map(|g| g.bytes).sum();
    if total > npairs as u64 * pc {
        return Err(AllocError::PairBudgetExceeded { needed: total.div_ceil(pc.max(1)), available: npairs as u64 });
    }

    let pieces = first_fit(&groups, pc, npairs).unwrap_or_else(|| fill_cutting(&groups, pc, &cut_rank));
    let mut out = PairAssignments::new();
    for (g, p) in groups.iter().zip(&pieces) {
        out.insert(g.file_id, lay_out(&g.chunks, p));
    }
    Ok(out)
}

/// (pair, bytes) pieces per group, in layout order; `None` when some piece
/// fits no pair whole.
fn first_fit(groups: &[FileGroup], pc: u64, npairs: usize) -> Option<Vec<Vec<(usize, u64)>>> {
    let mut load: Vec<u64> = Vec::new();
    let mut out = Vec::with_capacity(groups.len());
    for g in groups {
        let mut pieces = Vec::new();
        let mut left = g.bytes;
        while left > pc && load.len() < npairs {
            load.push(pc);
            pieces.push((load.len() - 1, pc));
            left -= pc;
        }
        if left > 0 {
            if let Some(p) = load.iter().position(|&l| l + left <= pc) {
                load[p] += left;
                pieces.push((p, left));
            } else if load.len() < npairs {
                load.push(left);
                pieces.push((load.len() - 1, left));
            } else {
                return None;
            }
        }
        out.push(pieces);
    }
    Some(out)
}

/// Packs pairs one after another with no gaps. Each pair takes the largest
/// remainders that fit whole (rank 0 files before ranked ones); what is left
/// of the pair goes to one cut remainder, highest rank first, whose rest
/// opens the next pair. Fits whenever the total does.
fn fill_cutting<F: Fn(u32) -> u64>(groups: &[FileGroup], pc: u64, cut_rank: &F) -> Vec<Vec<(usize, u64)>> {
    let mut out: Vec<Vec<(usize, u64)>> = vec![Vec::new(); groups.len()];
    let mut pair = 0;
    // (bytes, file id, group) of the part below one pair
    let (mut keep, mut cut) = (BTreeSet::new(), BTreeSet::new());
    let mut cut_order = BTreeSet::new();
    let ranks: Vec<u64> = groups.iter().map(|g| cut_rank(g.file_id)).collect();
    for (gi, g) in groups.iter().enumerate() {
        let mut left = g.bytes;
        while left > pc {
            out[gi].push((pair, pc));
            pair += 1;
            left -= pc;
        }
        if left > 0 {
            if ranks[gi] == 0 {
                keep.insert((left, g.file_id, gi));
            } else {
                cut.insert((left, g.file_id, gi));
                cut_order.insert((Reverse(ranks[gi]), left, g.file_id, gi));
            }
        }
    }
    let mut carry: Option<(usize, u64)> = None;
    while carry.is_some() || !keep.is_empty() || !cut.is_empty() {
        let mut free = pc;
        if let Some((gi, left)) = carry.take() {
            out[gi].push((pair, left));
            free -= left;
        }
        while free > 0 {
            let fits = |set: &BTreeSet<(u64, u32, usize)>| set.range(..=(free, u32::MAX, usize::MAX)).next_back().copied();
            let Some(item) = fits(&keep).or_else(|| fits(&cut)) else { break };
            keep.remove(&item);
            if cut.remove(&item) {
                cut_order.remove(&(Reverse(ranks[item.2]), item.0, item.1, item.2));
            }
            out[item.2].push((pair, item.0));
            free -= item.0;
        }
        if free > 0 {
            let victim = match cut_order.pop_first() {
                Some((_, bytes, f, gi)) => {
                    cut.remove(&(bytes, f, gi));
                    Some((bytes, gi))
                }
                None => keep.pop_first().map(|(bytes, _, gi)| (bytes, gi)),
            };
            if let Some((bytes, gi)) = victim {
                out[gi].push((pair, free));
                carry = Some((gi, bytes - free));
            }
        }
        pair += 1;
    }
    out
}

/// Maps the file's byte stream (chunks in id order) onto its pieces.
fn lay_out(chunks: &[(u32, u64)], pieces: &[(usize, u64)]) -> Vec<PairSlot> {
    let mut slots: BTreeMap<u32, PairSlot> = BTreeMap::new();
    let mut ci = 0;
    let mut used_in_chunk = 0u64;
    for &(pair, len) in pieces {
        let slot = slots.entry(pair as u32).or_insert_with(|| PairSlot { pair_id: pair as u32, chunk_ids: Vec::new(), bytes: 0 });
        slot.bytes += len;
        let mut need = len;
        while need > 0 {
            let (id, size) = chunks[ci];
            if slot.chunk_ids.last() != Some(&id) {
                slot.chunk_ids.push(id);
            }
            let take = (size - used_in_chunk).min(need);
            need -= take;
            used_in_chunk += take;
            if used_in_chunk == size {
                ci += 1;
                used_in_chunk = 0;
            }
        }
    }
    slots
        .into_values()
        .map(|mut s| {
            s.chunk_ids.sort_unstable();
            s.chunk_ids.dedup();
            s
        })
        .collect()
}

/// Sequencing operations needed to read `file_id` back: distinct pairs
/// holding its chunks, summed over tubes.
pub fn retrieval_cost(plan: &AllocationPlan, file_id: u32) -> Result<usize, AllocError> {
    let mut found = false;
    let mut cost = 0;
    for t in &plan.tubes {
        if let Some(slots) = t.pair_assignments.get(&file_id) {
            found = true;
            cost += slots.len();
        }
    }
    if found {
        Ok(cost)
    } else {
        Err(AllocError::UnknownFile(file_id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::CapacityParams;
    use crate::collision::CollisionSet;
    use rand::{Rng, SeedableRng};

    fn cfg() -> AllocConfig {
        // 39 bytes per strand, 10 strands per pair
        AllocConfig::new(CapacityParams::new(200, (19, 12), 10, 64).unwrap())
    }

    fn chunk(id: u32, file: u32, bytes: u32) -> Chunk {
        Chunk { chunk_id: id, file_id: file, byte_len: bytes, collisions: CollisionSet::new(64) }
    }

    /// Independent load check: recompute per-pair bytes and chunk coverage.
    fn check(chunks: &[Chunk], a: &PairAssignments, usable: usize, pc: u64) {
        let mut load: BTreeMap<u32, u64> = BTreeMap::new();
        for (file, slots) in a {
            let mut seen_pairs = Vec::new();
            let file_bytes: u64 = chunks.iter().filter(|c| c.file_id == *file).map(|c| c.byte_len as u64).sum();
            let mut placed = 0;
            for s in slots {
                assert!((s.pair_id as usize) < usable / 2);
                assert!(!seen_pairs.contains(&s.pair_id));
                seen_pairs.push(s.pair_id);
                *load.entry(s.pair_id).or_default() += s.bytes;
                placed += s.bytes;
                for id in &s.chunk_ids {
                    assert_eq!(chunks.iter().find(|c| c.chunk_id == *id).unwrap().file_id, *file);
                }
            }
            assert_eq!(placed, file_bytes);
            let listed: std::collections::BTreeSet<u32> = slots.iter().flat_map(|s| s.chunk_ids.iter().copied()).collect();
            let expected: std::collections::BTreeSet<u32> =
                chunks.iter().filter(|c| c.file_id == *file).map(|c| c.chunk_id).collect();
            assert_eq!(listed, expected);
        }
        for (_, l) in load {
            assert!(l <= pc);
        }
    }

    #[test]
    fn one_small_file_one_pair() {
        let cs = [chunk(0, 5, 100), chunk(1, 5, 200)];
        let refs: Vec<&Chunk> = cs.iter().collect();
        let a = assign_pairs(&refs, 10, &cfg()).unwrap();
        assert_eq!(a[&5].len(), 1);
        assert_eq!(a[&5][0].chunk_ids, vec![0, 1]);
        assert_eq!(a[&5][0].bytes, 300);
    }

    #[test]
    fn two_and_a_half_pairs_take_three() {
        let cs: Vec<Chunk> = (0..5).map(|i| chunk(i, 1, 195)).collect();
        let refs: Vec<&Chunk> = cs.iter().collect();
        let a = assign_pairs(&refs, 20, &cfg()).unwrap();
        assert_eq!(a[&1].len(), 3);
        check(&cs, &a, 20, 390);
    }

    #[test]
    fn over_budget() {
        let cs = [chunk(0, 0, 391)];
        let refs: Vec<&Chunk> = cs.iter().collect();
        assert!(matches!(assign_pairs(&refs, 3, &cfg()), Err(AllocError::PairBudgetExceeded { .. })));
    }

    #[test]
    fn tight_packing_splits_files() {
        // three files of 260 bytes in 2 pairs of 390: one is cut in two
        let cs: Vec<Chunk> = (0..3).map(|i| chunk(i, i, 260)).collect();
        let refs: Vec<&Chunk> = cs.iter().collect();
        let a = assign_pairs(&refs, 4, &cfg()).unwrap();
        check(&cs, &a, 4, 390);
        assert_eq!(a.values().map(|s| s.len()).collect::<Vec<_>>(), [2, 1, 1]);
        assert_eq!(a[&0][0].chunk_ids, vec![0]);
        assert_eq!(a[&0][1].chunk_ids, vec![0]);
        let a = assign_pairs(&refs, 6, &cfg()).unwrap();
        assert_eq!(a.values().map(|s| s.len()).sum::<usize>(), 3);
    }

    #[test]
    fn preferred_file_takes_the_cut() {
        let cs: Vec<Chunk> = (0..3).map(|i| chunk(i, i, 260)).collect();
        let refs: Vec<&Chunk> = cs.iter().collect();
        let a = assign_pairs_ranked(&refs, 4, &cfg(), |f| u64::from(f == 2)).unwrap();
        check(&cs, &a, 4, 390);
        assert_eq!(a.values().map(|s| s.len()).collect::<Vec<_>>(), [1, 1, 2]);
    }

    #[test]
    fn exactly_full_tubes_cut_each_file_at_most_once() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let pc = 390;
        for _ in 0..50 {
            let mut cs = Vec::new();
            let mut id = 0;
            let mut file = 0;
            let npairs = rng.gen_range(2..30u64);
            let mut left = npairs * pc;
            while left > 0 {
                let bytes = rng.gen_range(1..=pc * 2).min(left);
                // the file's bytes arrive as one to three chunks
                let parts = rng.gen_range(1..=3u64).min(bytes);
                for k in 0..parts {
                    let b = bytes / parts + u64::from(k < bytes % parts);
                    cs.push(chunk(id, file, b as u32));
                    id += 1;
                }
                left -= bytes;
                file += 1;
            }
            let refs: Vec<&Chunk> = cs.iter().collect();
            let a = assign_pairs_ranked(&refs, 2 * npairs as usize, &cfg(), |f| u64::from(f % 3)).unwrap();
            check(&cs, &a, 2 * npairs as usize, pc);
            for (f, slots) in &a {
                let bytes: u64 = slots.iter().map(|s| s.bytes).sum();
                assert!(slots.len() as u64 <= bytes.div_ceil(pc) + 1, "file {f} in {} pairs", slots.len());
            }
        }
    }

    #[test]
    fn random_groups_respect_pair_capacity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let pc = 390;
        let mut id = 0;
        let mut cs = Vec::new();
        for file in 0..1000u32 {
            for _ in 0..rng.gen_range(1..4) {
                cs.push(chunk(id, file, rng.gen_range(1..300)));
                id += 1;
            }
        }
        let total: u64 = cs.iter().map(|c| c.byte_len as u64).sum();
        let usable = 2 * total.div_ceil(pc) as usize + 1;
        let refs: Vec<&Chunk> = cs.iter().collect();
        let a = assign_pairs(&refs, usable, &cfg()).unwrap();
        assert_eq!(a.len(), 1000);
        check(&cs, &a, usable, pc);
    }
}
