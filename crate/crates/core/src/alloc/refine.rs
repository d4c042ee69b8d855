//! Refinement: fill the fullest cluster from the others, then seal it.

use std::cmp::Ordering;
use std::collections::HashMap;

use super::engine::Group;
use super::pairs::assign_pairs_ranked;
use super::priority::{AwareKey, Priority, UpgmaKey};
use super::{AllocConfig, AllocError, Chunk, Cluster, SealedTube};
use crate::capacity::tube_capacity_bytes;
use crate::collision::CollisionSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Migration {
    Aware,
    Upgma,
}

fn fill_cmp(a: &Group, b: &Group, cfg: &AllocConfig) -> Ordering {
    let cap = |g: &Group| tube_capacity_bytes(cfg.library_size() - g.union.count(), &cfg.params) as u128;
    // a.bytes / cap(a) vs b.bytes / cap(b); greater is fuller
    (a.bytes as u128 * cap(b))
        .cmp(&(b.bytes as u128 * cap(a)))
        .then(b.union.count().cmp(&a.union.count()))
        .then(b.id.cmp(&a.id))
}

/// Index of the cluster to fill next.
pub(crate) fn select(groups: &[Group], cfg: &AllocConfig) -> usize {
    let mut best = 0;
    for i in 1..groups.len() {
        if fill_cmp(&groups[i], &groups[best], cfg) == Ordering::Greater {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Aware(AwareKey),
    Upgma(UpgmaKey),
}

struct Candidate {
    pos: usize,
    inter: usize,
    union: usize,
    /// Sum of chunk distances to the target's members (UPGMA only).
    dist_sum: f64,
}

/// Grows `target` with chunks taken from `others` until nothing else fits.
/// Returns the positions that moved, in migration order.
pub(crate) fn migrate(items: &[&Chunk], target: &mut Group, others: &[Group], cfg: &AllocConfig, mode: Migration) -> Vec<usize> {
    let mut cands: Vec<Candidate> = others
        .iter()
        .flat_map(|g| g.members.iter().copied())
        .map(|pos| {
            let dist_sum = match mode {
                Migration::Aware => 0.0,
                Migration::Upgma => target.members.iter().map(|&m| chunk_distance(items[m], items[pos])).sum(),
            };
            Candidate { pos, inter: 0, union: 0, dist_sum }
        })
        .collect();
    let mut moved = Vec::new();
    let mut stale = true;

    loop {
        if stale {
            for c in cands.iter_mut() {
                let set = &items[c.pos].collisions;
                c.inter = target.union.intersection_count(set).expect("same width");
                c.union = target.union.count() + set.count() - c.inter;
            }
        }
        // capacity only shrinks as the target grows, so a misfit never fits later
        cands.retain(|c| cfg.fits(target.bytes + items[c.pos].byte_len as u64, c.union));
        let size = target.members.len() as f64;
        let key = |c: &Candidate| {
            let id = items[c.pos].chunk_id;
            match mode {
                Migration::Aware => Key::Aware(AwareKey {
                    priority: Priority::from_counts(c.inter, c.union),
                    union: c.union as u32,
                    lo: id,
                    hi: id,
                }),
                Migration::Upgma => {
                    Key::Upgma(UpgmaKey { distance: c.dist_sum / size, union: c.union as u32, lo: id, hi: id })
                }
            }
        };
        let Some(b) = (0..cands.len()).max_by_key(|&i| key(&cands[i])) else { break };
        let c = cands.swap_remove(b);
        let chunk = items[c.pos];
        let before = target.union.count();
        target.union.union_with(&chunk.collisions).expect("same width");
        target.bytes += chunk.byte_len as u64;
        target.members.push(c.pos);
        if mode == Migration::Upgma {
            for o in cands.iter_mut() {
                o.dist_sum += chunk_distance(chunk, items[o.pos]);
            }
        }
        stale = target.union.count() != before;
        moved.push(c.pos);
    }
    target.members.sort_unstable();
    moved
}

fn chunk_distance(a: &Chunk, b: &Chunk) -> f64 {
    let inter = a.collisions.intersection_count(&b.collisions).expect("same width");
    Priority::from_counts(inter, a.collisions.count() + b.collisions.count() - inter).distance()
}

/// Total bytes per file over `chunks`.
pub(crate) fn file_bytes(chunks: &[&Chunk]) -> HashMap<u32, u64> {
    let mut out = HashMap::new();
    for c in chunks {
        *out.entry(c.file_id).or_insert(0) += c.byte_len as u64;
    }
    out
}

/// Seals `g`. Files that lie wholly in this tube (per `file_totals`) are the
/// ones cut first if the pairs cannot take every file whole.
pub(crate) fn seal(
    tube_id: u32,
    items: &[&Chunk],
    g: &Group,
    cfg: &AllocConfig,
    file_totals: &HashMap<u32, u64>,
) -> Result<SealedTube, AllocError> {
    let members: Vec<&Chunk> = g.members.iter().map(|&p| items[p]).collect();
    let collided = g.union.count();
    let usable = cfg.library_size() - collided;
    let mut chunks: Vec<u32> = members.iter().map(|c| c.chunk_id).collect();
    chunks.sort_unstable();
    let here = file_bytes(&members);
    let whole_here = |f: u32| u64::from(file_totals.get(&f) == here.get(&f));
    Ok(SealedTube {
        tube_id,
        chunks,
        total_bytes: g.bytes,
        collided_primers: collided,
        usable_primers: usable,
        capacity_bytes: tube_capacity_bytes(usable, &cfg.params),
        pair_assignments: assign_pairs_ranked(&members, usable, cfg, whole_here)?,
    })
}

/// Selects the fullest cluster, migrates the best-priority outside chunks
/// into it while they fit, and seals it as tube `tube_id`. The remaining
/// clusters keep their ids; emptied clusters are dropped.
pub fn refine_and_seal(
    chunks: &[Chunk],
    clusters: &[Cluster],
    cfg: &AllocConfig,
    tube_id: u32,
) -> Result<(SealedTube, Vec<Cluster>), AllocError> {
    refine_and_seal_with(chunks, clusters, cfg, tube_id, Migration::Aware)
}

/// [`refine_and_seal`] with migration by smallest average chunk distance.
pub fn refine_and_seal_upgma(
    chunks: &[Chunk],
    clusters: &[Cluster],
    cfg: &AllocConfig,
    tube_id: u32,
) -> Result<(SealedTube, Vec<Cluster>), AllocError> {
    refine_and_seal_with(chunks, clusters, cfg, tube_id, Migration::Upgma)
}

fn refine_and_seal_with(
    chunks: &[Chunk],
    clusters: &[Cluster],
    cfg: &AllocConfig,
    tube_id: u32,
    mode: Migration,
) -> Result<(SealedTube, Vec<Cluster>), AllocError> {
    assert!(!clusters.is_empty(), "refine_and_seal needs at least one cluster");
    let by_id: HashMap<u32, usize> = chunks.iter().enumerate().map(|(i, c)| (c.chunk_id, i)).collect();
    let items: Vec<&Chunk> = chunks.iter().collect();
    let mut groups = Vec::with_capacity(clusters.len());
    for cl in clusters {
        let mut members = Vec::with_capacity(cl.members.len());
        for id in &cl.members {
            members.push(*by_id.get(id).ok_or(AllocError::UnknownChunk(*id))?);
        }
        members.sort_unstable();
        groups.push(Group { id: cl.cluster_id, members, union: cl.union_collisions.clone(), bytes: cl.total_bytes });
    }
    let s = select(&groups, cfg);
    let mut target = groups.swap_remove(s);
    let moved = migrate(&items, &mut target, &groups, cfg, mode);
    let tube = seal(tube_id, &items, &target, cfg, &file_bytes(&items))?;

    let moved: std::collections::HashSet<u32> = moved.iter().map(|&p| items[p].chunk_id).collect();
    let mut rest = Vec::new();
    for cl in clusters {
        if cl.cluster_id == target.id {
            continue;
        }
        let members: Vec<u32> = cl.members.iter().copied().filter(|id| !moved.contains(id)).collect();
        if members.is_empty() {
            continue;
        }
        let mut c = Cluster {
            cluster_id: cl.cluster_id,
            members,
            union_collisions: CollisionSet::new(cfg.library_size()),
            total_bytes: 0,
        };
        c.recompute(|id| items[by_id[&id]]);
        rest.push(c);
    }
    Ok((tube, rest))
}
