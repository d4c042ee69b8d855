#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tubealloc::capacity::{tube_capacity_bytes, CapacityParams};
use tubealloc::{AllocConfig, AllocationPlan, Chunk, CollisionSet};

pub fn config(width: usize, pf: u64) -> AllocConfig {
    AllocConfig::new(CapacityParams::new(200, (19, 12), pf, width).unwrap())
}

/// Disjoint-subset plant in which every group exactly fills one tube.
///
/// Group `g` owns primers `g*block..(g+1)*block`. Its first chunk collides
/// with the whole block, the others with the block minus up to a third of it,
/// so every group's union is the full block. Group bytes add up to the tube
/// capacity left by `block` collided primers, which leaves no room for any
/// foreign chunk. Chunk `i` belongs to group `i % groups`.
pub fn planted(seed: u64, groups: usize, block: usize, chunks_per_group: usize, cfg: &AllocConfig) -> Vec<Chunk> {
    let width = cfg.params.library_size;
    assert!(groups * block <= width);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = tube_capacity_bytes(width - block, &cfg.params);
    assert!(cap >= chunks_per_group as u64, "tube too small for the group");
    let sizes: Vec<Vec<u32>> = (0..groups)
        .map(|_| {
            let mut cuts: Vec<u64> = (1..cap).collect::<Vec<_>>().choose_multiple(&mut rng, chunks_per_group - 1).copied().collect();
            cuts.push(0);
            cuts.push(cap);
            cuts.sort_unstable();
            cuts.windows(2).map(|w| (w[1] - w[0]) as u32).collect()
        })
        .collect();
    (0..groups * chunks_per_group)
        .map(|i| {
            let (g, j) = (i % groups, i / groups);
            let mut ids: Vec<usize> = (g * block..(g + 1) * block).collect();
            if j > 0 {
                ids.shuffle(&mut rng);
                let drop = rng.gen_range(0..=block / 3);
                ids.truncate(block - drop);
            }
            Chunk {
                chunk_id: i as u32,
                file_id: (i / 3) as u32,
                byte_len: sizes[g][j],
                collisions: CollisionSet::from_indices(width, ids),
            }
        })
        .collect()
}

/// Aware-minus-optimal objective on the 25 unstructured instances below.
pub const AUDIT_GAPS: [u64; 25] = [3, 0, 1, 1, 0, 1, 1, 1, 0, 1, 0, 1, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 1, 0];

/// Small-instance audit family: tight disjoint plants, `s` in 0..25.
pub fn audit_plant(s: u64) -> (Vec<Chunk>, AllocConfig) {
    let groups = 2 + (s % 2) as usize;
    let block = 4 + (s % 3) as usize;
    let cpg = 2 + (s as usize / 3) % (10 / groups - 1);
    let cfg = config(24, 1 + s % 2);
    (planted(s, groups, block, cpg, &cfg), cfg)
}

/// Small-instance audit family: unstructured, `s` in 0..25.
pub fn audit_random(s: u64) -> (Vec<Chunk>, AllocConfig) {
    let n = 6 + (s % 5) as usize;
    (random_instance(1000 + s, n, 16, 0.25, 120), config(16, 1))
}

/// Unstructured instance: each chunk hits each primer with probability `p`.
pub fn random_instance(seed: u64, n: usize, width: usize, p: f64, max_bytes: u32) -> Vec<Chunk> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| Chunk {
            chunk_id: i as u32,
            file_id: rng.gen_range(0..(n as u32 / 2).max(1)),
            byte_len: rng.gen_range(1..=max_bytes),
            collisions: CollisionSet::from_indices(width, (0..width).filter(|_| rng.gen_bool(p))),
        })
        .collect()
}

/// Minimum objective over all set partitions of `chunks` whose blocks are
/// all feasible, by restricted-growth-string enumeration.
pub fn brute_force_min(chunks: &[Chunk], cfg: &AllocConfig) -> Option<u64> {
    let n = chunks.len();
    if n == 0 {
        return Some(0);
    }
    let width = cfg.params.library_size;
    let mut best: Option<u64> = None;
    let mut rgs = vec![0usize; n];
    loop {
        let blocks = rgs.iter().max().unwrap() + 1;
        let mut unions = vec![vec![false; width]; blocks];
        let mut bytes = vec![0u64; blocks];
        for (i, &b) in rgs.iter().enumerate() {
            bytes[b] += chunks[i].byte_len as u64;
            for p in chunks[i].collisions.iter() {
                unions[b][p] = true;
            }
        }
        let mut total = 0u64;
        let mut ok = true;
        for b in 0..blocks {
            let collided = unions[b].iter().filter(|&&x| x).count();
            if bytes[b] > tube_capacity_bytes(width - collided, &cfg.params) {
                ok = false;
                break;
            }
            total += collided as u64;
        }
        if ok && best.is_none_or(|v| total < v) {
            best = Some(total);
        }
        // next restricted growth string
        let mut i = n - 1;
        loop {
            if i == 0 {
                return best;
            }
            let cap = rgs[..i].iter().max().unwrap() + 1;
            if rgs[i] < cap {
                rgs[i] += 1;
                for r in rgs.iter_mut().skip(i + 1) {
                    *r = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

/// Bell numbers B(0)..B(n), for sanity-checking the enumerator.
pub fn bell(n: usize) -> Vec<u64> {
    let mut row = vec![1u64];
    let mut out = vec![1u64];
    for _ in 0..n {
        let mut next = vec![*row.last().unwrap()];
        for &v in &row {
            let x = next.last().unwrap() + v;
            next.push(x);
        }
        out.push(next[0]);
        row = next;
    }
    out
}

/// Every structural invariant a plan must satisfy, recomputed from scratch.
pub fn check_plan(chunks: &[Chunk], plan: &AllocationPlan, cfg: &AllocConfig) {
    let width = cfg.params.library_size;
    let pc = tubealloc::pair_capacity_bytes(&cfg.params);
    let mut ids: Vec<u32> = plan.tubes.iter().flat_map(|t| t.chunks.iter().copied()).collect();
    ids.extend(plan.quarantined.iter().map(|q| q.chunk_id));
    ids.sort_unstable();
    let mut input: Vec<u32> = chunks.iter().map(|c| c.chunk_id).collect();
    input.sort_unstable();
    assert_eq!(ids, input, "conservation");

    let mut objective = 0;
    for t in &plan.tubes {
        let members: Vec<&Chunk> = t.chunks.iter().map(|id| chunks.iter().find(|c| c.chunk_id == *id).unwrap()).collect();
        let mut u = CollisionSet::new(width);
        for c in &members {
            u.union_with(&c.collisions).unwrap();
        }
        let bytes: u64 = members.iter().map(|c| c.byte_len as u64).sum();
        assert_eq!(t.collided_primers, u.count(), "union cache");
        assert_eq!(t.usable_primers, width - u.count());
        assert_eq!(t.total_bytes, bytes, "bytes cache");
        assert_eq!(t.capacity_bytes, tube_capacity_bytes(t.usable_primers, &cfg.params));
        assert!(t.total_bytes <= t.capacity_bytes, "feasibility");
        assert!(t.pairs_used() <= t.usable_primers / 2);
        let mut load = std::collections::BTreeMap::<u32, u64>::new();
        for (file, slots) in &t.pair_assignments {
            for s in slots {
                *load.entry(s.pair_id).or_default() += s.bytes;
                for id in &s.chunk_ids {
                    assert!(t.chunks.contains(id));
                    assert_eq!(members.iter().find(|c| c.chunk_id == *id).unwrap().file_id, *file);
                }
            }
        }
        assert!(load.values().all(|&l| l <= pc), "pair load");
        assert_eq!(load.values().sum::<u64>(), bytes);
        objective += u.count() as u64;
    }
    assert_eq!(plan.objective, objective);
}
