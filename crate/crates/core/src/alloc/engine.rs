//! Agglomerative clustering under the tube-capacity constraint.
//!
//! Clusters are immutable between merges, so the key of any pair never
//! changes while both sides live. Each cluster keeps its best `TOP_M`
//! feasible partners plus a threshold `tau` bounding every partner it does not
//! list. A global lazy max-heap holds list heads; stale heads are repaired on
//! pop, and a list is rebuilt with one linear scan only when all of its
//! entries have died. A merged cluster takes the lower slot of its parts, gets
//! a fresh id, and is offered to every live cluster. Only its own head enters
//! the heap: a pair it offers can only be the global best while it is also the
//! merged cluster's best, and that side's list is repaired or rebuilt as its
//! entries die.

use std::collections::BinaryHeap;

use super::priority::{AwareKey, MergeKey, Priority, UpgmaKey};
use super::{AllocConfig, AllocError, Chunk, Cluster};
use crate::collision::CollisionSet;

const TOP_M: usize = 8;

/// Merge criterion plugged into the engine.
pub(crate) trait Linkage {
    type Key: MergeKey;

    /// Sees every initial singleton pair once, feasible or not.
    fn observe(&mut self, _x: usize, _y: usize, _inter: usize, _union: usize) {}

    fn key(&self, x: usize, y: usize, inter: usize, union: usize, id_x: u32, id_y: u32) -> Self::Key;

    /// Slots `keep` and `gone` merge into `keep`; `sizes` are member counts before the merge.
    fn on_merge(&mut self, _keep: usize, _gone: usize, _sizes: (usize, usize), _alive: &[bool]) {}
}

#[inline]
fn ordered(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub(crate) struct AwareLinkage;

impl Linkage for AwareLinkage {
    type Key = AwareKey;

    #[inline]
    fn key(&self, _x: usize, _y: usize, inter: usize, union: usize, id_x: u32, id_y: u32) -> AwareKey {
        let (lo, hi) = ordered(id_x, id_y);
        AwareKey { priority: Priority::from_counts(inter, union), union: union as u32, lo, hi }
    }
}

/// Average linkage over chunk distances `1 - priority`, with a condensed
/// distance matrix updated by the Lance-Williams rule.
pub(crate) struct UpgmaLinkage {
    dist: Vec<f64>,
}

impl UpgmaLinkage {
    pub(crate) fn new(n: usize) -> Self {
        UpgmaLinkage { dist: vec![0.0; n * n.saturating_sub(1) / 2] }
    }

    #[inline]
    fn idx(x: usize, y: usize) -> usize {
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        b * (b - 1) / 2 + a
    }

    pub(crate) fn distance(&self, x: usize, y: usize) -> f64 {
        self.dist[Self::idx(x, y)]
    }
}

impl Linkage for UpgmaLinkage {
    type Key = UpgmaKey;

    fn observe(&mut self, x: usize, y: usize, inter: usize, union: usize) {
        self.dist[Self::idx(x, y)] = Priority::from_counts(inter, union).distance();
    }

    #[inline]
    fn key(&self, x: usize, y: usize, _inter: usize, union: usize, id_x: u32, id_y: u32) -> UpgmaKey {
        let (lo, hi) = ordered(id_x, id_y);
        UpgmaKey { distance: self.distance(x, y), union: union as u32, lo, hi }
    }

    fn on_merge(&mut self, keep: usize, gone: usize, sizes: (usize, usize), alive: &[bool]) {
        let (na, nb) = (sizes.0 as f64, sizes.1 as f64);
        for z in 0..alive.len() {
            if !alive[z] || z == keep || z == gone {
                continue;
            }
            let d = (na * self.distance(keep, z) + nb * self.distance(gone, z)) / (na + nb);
            self.dist[Self::idx(keep, z)] = d;
        }
    }
}

struct TopList<K> {
    items: Vec<(K, u32, u32)>,
    tau: Option<K>,
}

impl<K: MergeKey> TopList<K> {
    fn new() -> Self {
        TopList { items: Vec::with_capacity(TOP_M + 1), tau: None }
    }

    fn offer(&mut self, key: K, slot: u32, id: u32) {
        if self.tau.is_some_and(|t| key <= t) {
            return;
        }
        let pos = self.items.partition_point(|e| e.0 > key);
        self.items.insert(pos, (key, slot, id));
        if self.items.len() > TOP_M {
            let dropped = self.items.pop().expect("non-empty").0;
            self.tau = Some(self.tau.map_or(dropped, |t| t.max(dropped)));
        }
    }
}

/// Output group: member positions (ascending) into the engine input.
pub(crate) struct Group {
    pub id: u32,
    pub members: Vec<usize>,
    pub union: CollisionSet,
    pub bytes: u64,
}

struct State<'a, L: Linkage> {
    cfg: &'a AllocConfig,
    linkage: L,
    words: usize,
    sets: Vec<u64>,
    counts: Vec<u32>,
    bytes: Vec<u64>,
    ids: Vec<u32>,
    alive: Vec<bool>,
    members: Vec<Vec<usize>>,
    lists: Vec<TopList<L::Key>>,
    heap: BinaryHeap<(L::Key, u32, u32, u32, u32)>,
    next_id: u32,
}

impl<L: Linkage> State<'_, L> {
    #[inline]
    fn inter(&self, x: usize, y: usize) -> usize {
        let w = self.words;
        self.sets[x * w..(x + 1) * w]
            .iter()
            .zip(&self.sets[y * w..(y + 1) * w])
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    #[inline]
    fn live(&self, slot: u32, id: u32) -> bool {
        self.alive[slot as usize] && self.ids[slot as usize] == id
    }

    /// Key of the pair if the merged cluster would fit its tube.
    #[inline]
    fn pair_key(&self, x: usize, y: usize) -> Option<L::Key> {
        let inter = self.inter(x, y);
        let union = self.counts[x] as usize + self.counts[y] as usize - inter;
        if !self.cfg.fits(self.bytes[x] + self.bytes[y], union) {
            return None;
        }
        Some(self.linkage.key(x, y, inter, union, self.ids[x], self.ids[y]))
    }

    fn push_head(&mut self, x: usize) {
        if let Some(&(k, s, id)) = self.lists[x].items.first() {
            self.heap.push((k, x as u32, self.ids[x], s, id));
        }
    }

    fn rebuild(&mut self, x: usize) {
        let mut list = TopList::new();
        for z in 0..self.alive.len() {
            if z != x && self.alive[z] {
                if let Some(k) = self.pair_key(x, z) {
                    list.offer(k, z as u32, self.ids[z]);
                }
            }
        }
        self.lists[x] = list;
    }

    fn refresh(&mut self, x: usize) {
        let mut items = std::mem::take(&mut self.lists[x].items);
        items.retain(|&(_, s, id)| self.live(s, id));
        let exhausted = items.is_empty() && self.lists[x].tau.is_some();
        self.lists[x].items = items;
        if exhausted {
            self.rebuild(x);
        }
        self.push_head(x);
    }

    fn merge(&mut self, a: usize, b: usize) {
        let (keep, gone) = if a < b { (a, b) } else { (b, a) };
        let sizes = (self.members[keep].len(), self.members[gone].len());
        self.linkage.on_merge(keep, gone, sizes, &self.alive);

        let w = self.words;
        let mut count = 0;
        for i in 0..w {
            let v = self.sets[keep * w + i] | self.sets[gone * w + i];
            self.sets[keep * w + i] = v;
            count += v.count_ones();
        }
        self.counts[keep] = count;
        self.bytes[keep] += self.bytes[gone];
        let moved = std::mem::take(&mut self.members[gone]);
        let kept = std::mem::take(&mut self.members[keep]);
        self.members[keep] = merge_sorted(kept, moved);
        self.alive[gone] = false;
        self.lists[gone] = TopList::new();
        self.ids[keep] = self.next_id;
        self.next_id += 1;

        let mut list = TopList::new();
        for z in 0..self.alive.len() {
            if z == keep || !self.alive[z] {
                continue;
            }
            // entries naming either part are dead; left in place they would crowd out live ones
            self.lists[z].items.retain(|e| e.1 != keep as u32 && e.1 != gone as u32);
            if let Some(k) = self.pair_key(keep, z) {
                list.offer(k, z as u32, self.ids[z]);
                self.lists[z].offer(k, keep as u32, self.ids[keep]);
            }
        }
        self.lists[keep] = list;
        self.push_head(keep);
    }
}

fn merge_sorted(a: Vec<usize>, b: Vec<usize>) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Greedy agglomeration of `items` (each individually feasible) until no
/// feasible merge remains. Groups come back ordered by id.
pub(crate) fn cluster_items<L: Linkage>(items: &[&Chunk], cfg: &AllocConfig, linkage: L) -> Vec<Group> {
    let n = items.len();
    let width = cfg.library_size();
    let words = width.div_ceil(64);
    let mut sets = Vec::with_capacity(n * words);
    for c in items {
        sets.extend_from_slice(c.collisions.words());
    }
    let mut st = State {
        cfg,
        linkage,
        words,
        sets,
        counts: items.iter().map(|c| c.collisions.count() as u32).collect(),
        bytes: items.iter().map(|c| c.byte_len as u64).collect(),
        ids: (0..n as u32).collect(),
        alive: vec![true; n],
        members: (0..n).map(|i| vec![i]).collect(),
        lists: (0..n).map(|_| TopList::new()).collect(),
        heap: BinaryHeap::new(),
        next_id: n as u32,
    };

    for j in 1..n {
        for i in 0..j {
            let inter = st.inter(i, j);
            let union = st.counts[i] as usize + st.counts[j] as usize - inter;
            st.linkage.observe(i, j, inter, union);
            if cfg.fits(st.bytes[i] + st.bytes[j], union) {
                let k = st.linkage.key(i, j, inter, union, i as u32, j as u32);
                st.lists[i].offer(k, j as u32, j as u32);
                st.lists[j].offer(k, i as u32, i as u32);
            }
        }
    }
    for x in 0..n {
        st.push_head(x);
    }

    while let Some((_, x, idx, y, idy)) = st.heap.pop() {
        if !st.live(x, idx) {
            continue;
        }
        if !st.live(y, idy) {
            st.refresh(x as usize);
            continue;
        }
        st.merge(x as usize, y as usize);
    }

    let mut groups: Vec<Group> = (0..n)
        .filter(|&s| st.alive[s])
        .map(|s| Group {
            id: st.ids[s],
            members: std::mem::take(&mut st.members[s]),
            union: CollisionSet::from_words(width, st.sets[s * words..(s + 1) * words].to_vec()),
            bytes: st.bytes[s],
        })
        .collect();
    groups.sort_by_key(|g| g.id);
    groups
}

pub(crate) fn groups_to_clusters(items: &[&Chunk], groups: Vec<Group>) -> Vec<Cluster> {
    groups
        .into_iter()
        .map(|g| {
            let mut members: Vec<u32> = g.members.iter().map(|&i| items[i].chunk_id).collect();
            members.sort_unstable();
            Cluster { cluster_id: g.id, members, union_collisions: g.union, total_bytes: g.bytes }
        })
        .collect()
}

pub(crate) fn check_singletons(chunks: &[Chunk], cfg: &AllocConfig) -> Result<(), AllocError> {
    for c in chunks {
        if c.collisions.width() != cfg.library_size() {
            return Err(crate::collision::CollisionError::WidthMismatch {
                left: cfg.library_size(),
                right: c.collisions.width(),
            }
            .into());
        }
        if c.byte_len == 0 || !cfg.fits(c.byte_len as u64, c.collisions.count()) {
            return Err(AllocError::InfeasibleChunk(c.chunk_id));
        }
    }
    Ok(())
}

/// Merge-priority clustering of `chunks`, starting from singletons.
///
/// Cluster ids: singleton `i` (input position) has id `i`; each merge mints
/// the next unused id.
pub fn initial_clustering(chunks: &[Chunk], cfg: &AllocConfig) -> Result<Vec<Cluster>, AllocError> {
    check_singletons(chunks, cfg)?;
    let items: Vec<&Chunk> = chunks.iter().collect();
    let groups = cluster_items(&items, cfg, AwareLinkage);
    Ok(groups_to_clusters(&items, groups))
}

/// Average-linkage counterpart of [`initial_clustering`].
pub fn initial_clustering_upgma(chunks: &[Chunk], cfg: &AllocConfig) -> Result<Vec<Cluster>, AllocError> {
    check_singletons(chunks, cfg)?;
    let items: Vec<&Chunk> = chunks.iter().collect();
    let groups = cluster_items(&items, cfg, UpgmaLinkage::new(items.len()));
    Ok(groups_to_clusters(&items, groups))
}
