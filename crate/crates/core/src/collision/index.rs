//! Seeded collision detector.
//!
//! Candidates come from exact seeds; every candidate is confirmed by a
//! bit-parallel edit-distance search over a text region that provably
//! contains any qualifying alignment, so results equal the oracle's.
//!
//! Two seed layouts are used:
//!
//! * `Paired` (two edits, `window_len / 3` in 2..=5). The window is cut into
//!   parts `A B C` of length `k` plus a remainder. A match with at most two
//!   edits has `AB` within one edit, `BC` within one edit, or `A` and `C`
//!   exact with all edits inside `B`, leaving a gap of `k - 2 ..= k + 2`
//!   text bases between them. The one-edit neighbourhoods of every primer
//!   `2k`-mer are tabulated by text string, and `(A, C, gap)` triples by key.
//!   This keeps candidate counts low even for large libraries.
//! * `Pigeonhole` (anything else). Split the window into `max_edits + 1`
//!   parts of length `window_len / (max_edits + 1)`; one of them occurs
//!   exactly.

use crate::codec::Base;
use crate::primerlib::PrimerLibrary;

use super::myers::{build_peq, search, Peq};
use super::oracle::window_min_distance;
use super::{CollisionParams, CollisionSet};
use crate::codec::PayloadFrame;

const POS_BITS: u32 = 8;
const POS_MASK: u32 = (1 << POS_BITS) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedStrategy {
    Paired,
    Pigeonhole,
}

/// Flat key -> entries table.
#[derive(Debug, Clone, Default)]
struct Csr {
    offsets: Vec<u32>,
    entries: Vec<u32>,
}

impl Csr {
    fn build(key_space: usize, mut pairs: Vec<(u32, u32)>) -> Csr {
        pairs.sort_unstable();
        pairs.dedup();
        let mut offsets = vec![0u32; key_space + 1];
        for &(k, _) in &pairs {
            offsets[k as usize + 1] += 1;
        }
        for i in 0..key_space {
            offsets[i + 1] += offsets[i];
        }
        let entries = pairs.into_iter().map(|(_, e)| e).collect();
        Csr { offsets, entries }
    }

    #[inline]
    fn get(&self, key: usize) -> &[u32] {
        &self.entries[self.offsets[key] as usize..self.offsets[key + 1] as usize]
    }

    fn len(&self) -> usize {
        self.entries.len()
    }
}

#[derive(Debug, Clone)]
enum Tables {
    Paired {
        /// One-edit neighbourhoods of primer 2k-mers, by text length 2k-1, 2k, 2k+1.
        near: [Csr; 3],
        /// `(A, C, gap)` keyed windows.
        spaced: Csr,
    },
    Pigeonhole {
        seeds: Csr,
    },
}

/// Immutable detector over one primer library.
#[derive(Debug, Clone)]
pub struct CollisionIndex {
    params: CollisionParams,
    library_size: usize,
    /// Sequences searched (primers, then reverse complements when enabled).
    patterns: Vec<Vec<u8>>,
    pattern_primer: Vec<u32>,
    /// First window slot of each pattern in `peq`.
    window_base: Vec<usize>,
    peq: Vec<Peq>,
    k: usize,
    tables: Tables,
}

#[inline]
fn pack(codes: &[u8]) -> usize {
    codes.iter().fold(0usize, |a, &c| (a << 2) | c as usize)
}

fn one_edit_neighbours(s: &[u8], mut f: impl FnMut(&[u8])) {
    let mut buf = Vec::with_capacity(s.len() + 1);
    f(s);
    for i in 0..s.len() {
        buf.clear();
        buf.extend_from_slice(s);
        for c in 0..4u8 {
            if c != s[i] {
                buf[i] = c;
                f(&buf);
            }
        }
        buf.clear();
        buf.extend_from_slice(&s[..i]);
        buf.extend_from_slice(&s[i + 1..]);
        f(&buf);
    }
    for i in 0..=s.len() {
        for c in 0..4u8 {
            buf.clear();
            buf.extend_from_slice(&s[..i]);
            buf.push(c);
            buf.extend_from_slice(&s[i..]);
            f(&buf);
        }
    }
}

impl CollisionIndex {
    pub fn params(&self) -> &CollisionParams {
        &self.params
    }

    pub fn library_size(&self) -> usize {
        self.library_size
    }

    /// Exact seed length implied by the pigeonhole argument.
    pub fn seed_len(&self) -> usize {
        self.params.seed_len()
    }

    pub fn strategy(&self) -> SeedStrategy {
        match self.tables {
            Tables::Paired { .. } => SeedStrategy::Paired,
            Tables::Pigeonhole { .. } => SeedStrategy::Pigeonhole,
        }
    }

    /// Total stored seed entries, for diagnostics.
    pub fn entry_count(&self) -> usize {
        match &self.tables {
            Tables::Paired { near, spaced } => near.iter().map(Csr::len).sum::<usize>() + spaced.len(),
            Tables::Pigeonhole { seeds } => seeds.len(),
        }
    }

    fn windows_of(&self, pattern: usize) -> usize {
        (self.patterns[pattern].len() + 1).saturating_sub(self.params.window_len)
    }

    /// Does window `i` of `pattern` match somewhere in `text[lo..hi]`?
    #[inline]
    fn verify(&self, pattern: usize, i: usize, text: &[u8], lo: isize, hi: isize) -> bool {
        let lo = lo.max(0) as usize;
        let hi = (hi.max(0) as usize).min(text.len());
        if lo >= hi {
            return false;
        }
        let w = self.params.window_len;
        let region = &text[lo..hi];
        if w <= 64 {
            search(&self.peq[self.window_base[pattern] + i], w, region, self.params.max_edits)
        } else {
            let win: Vec<Base> = self.patterns[pattern][i..i + w].iter().map(|&c| Base::from_code(c)).collect();
            let reg: Vec<Base> = region.iter().map(|&c| Base::from_code(c)).collect();
            window_min_distance(&win, &reg) <= self.params.max_edits
        }
    }

    /// Adds every primer colliding with `text` (2-bit codes) to `out`.
    pub fn scan_codes(&self, text: &[u8], out: &mut CollisionSet) {
        let n = text.len();
        let w = self.params.window_len as isize;
        let e = self.params.max_edits as isize;
        let k = self.k;
        match &self.tables {
            Tables::Pigeonhole { seeds } => {
                if n < k {
                    return;
                }
                let mask = (1usize << (2 * k)) - 1;
                let mut code = pack(&text[..k - 1]);
                for t in 0..=n - k {
                    code = ((code << 2) | text[t + k - 1] as usize) & mask;
                    for &entry in seeds.get(code) {
                        let p = (entry >> POS_BITS) as usize;
                        let primer = self.pattern_primer[p] as usize;
                        if out.contains(primer) {
                            continue;
                        }
                        let q = (entry & POS_MASK) as usize;
                        let windows = self.windows_of(p);
                        for j in 0..=self.params.max_edits {
                            let Some(i) = q.checked_sub(j * k) else { break };
                            if i >= windows {
                                continue;
                            }
                            let base = t as isize - (j * k) as isize;
                            if self.verify(p, i, text, base - e, base + w + 2 * e) {
                                out.insert(primer);
                                break;
                            }
                        }
                    }
                }
            }
            Tables::Paired { near, spaced } => {
                let k2 = 2 * k;
                let ki = k as isize;
                let kmask = (1usize << (2 * k)) - 1;
                for t in 0..n {
                    let ti = t as isize;
                    for (slot, table) in near.iter().enumerate() {
                        let len = k2 - 1 + slot;
                        if t + len > n {
                            continue;
                        }
                        for &entry in table.get(pack(&text[t..t + len])) {
                            let p = (entry >> POS_BITS) as usize;
                            let primer = self.pattern_primer[p] as usize;
                            if out.contains(primer) {
                                continue;
                            }
                            let q = (entry & POS_MASK) as usize;
                            let windows = self.windows_of(p);
                            // AB role: window starts at q, alignment starts at t.
                            if q < windows && self.verify(p, q, text, ti, ti + w + 2 * e) {
                                out.insert(primer);
                                continue;
                            }
                            // BC role: window starts at q - k.
                            if q >= k && q - k < windows && self.verify(p, q - k, text, ti - ki - e, ti - ki + w + 2 * e) {
                                out.insert(primer);
                            }
                        }
                    }
                    if t + k2 - 2 + k > n {
                        continue;
                    }
                    let a = pack(&text[t..t + k]);
                    for gi in 0..5 {
                        let c0 = t + k + (k - 2) + gi;
                        if c0 + k > n {
                            break;
                        }
                        let c = pack(&text[c0..c0 + k]) & kmask;
                        let key = ((a << (2 * k)) | c) * 5 + gi;
                        for &entry in spaced.get(key) {
                            let p = (entry >> POS_BITS) as usize;
                            let primer = self.pattern_primer[p] as usize;
                            if out.contains(primer) {
                                continue;
                            }
                            let i = (entry & POS_MASK) as usize;
                            if self.verify(p, i, text, ti, ti + w + 2 * e) {
                                out.insert(primer);
                            }
                        }
                    }
                }
            }
        }
    }

    /// Collision set of a single payload.
    pub fn payload_collisions(&self, payload: &[Base]) -> CollisionSet {
        let mut out = CollisionSet::new(self.library_size);
        let codes: Vec<u8> = payload.iter().map(|b| b.code()).collect();
        self.scan_codes(&codes, &mut out);
        out
    }
}

/// Builds the seed tables for `lib`.
pub fn build_collision_index(lib: &PrimerLibrary, params: &CollisionParams) -> CollisionIndex {
    params.validate().expect("invalid collision parameters");
    let w = params.window_len;
    let e = params.max_edits;
    let mut patterns: Vec<Vec<u8>> = Vec::new();
    let mut pattern_primer = Vec::new();
    for p in &lib.primers {
        assert!(p.bases.len() <= POS_MASK as usize + 1, "primer too long for the index");
        patterns.push(p.bases.codes());
        pattern_primer.push(p.id);
    }
    if params.reverse_complement {
        for p in &lib.primers {
            patterns.push(p.bases.reverse_complement().codes());
            pattern_primer.push(p.id);
        }
    }
    assert!(patterns.len() < 1 << (32 - POS_BITS), "library too large for the index");

    let mut window_base = Vec::with_capacity(patterns.len());
    let mut peq = Vec::new();
    for pat in &patterns {
        window_base.push(peq.len());
        if w <= 64 {
            for win in pat.windows(w) {
                peq.push(build_peq(win));
            }
        }
    }

    let k = params.seed_len();
    let windows = |pat: &Vec<u8>| (pat.len() + 1).saturating_sub(w);
    let tables = if e == 2 && (2..=5).contains(&k) {
        let k2 = 2 * k;
        let mut near_pairs: [Vec<(u32, u32)>; 3] = Default::default();
        let mut spaced_pairs = Vec::new();
        for (pi, pat) in patterns.iter().enumerate() {
            let nw = windows(pat);
            if nw == 0 {
                continue;
            }
            // 2k-mers at q serve window q (AB) and window q - k (BC).
            for q in 0..nw + k {
                if q + k2 > pat.len() {
                    break;
                }
                let entry = (pi as u32) << POS_BITS | q as u32;
                one_edit_neighbours(&pat[q..q + k2], |s| {
                    near_pairs[s.len() + 1 - k2].push((pack(s) as u32, entry));
                });
            }
            for i in 0..nw {
                let a = pack(&pat[i..i + k]);
                let c = pack(&pat[i + k2..i + k2 + k]);
                let entry = (pi as u32) << POS_BITS | i as u32;
                for gi in 0..5 {
                    spaced_pairs.push(((((a << (2 * k)) | c) * 5 + gi) as u32, entry));
                }
            }
        }
        let [n0, n1, n2] = near_pairs;
        Tables::Paired {
            near: [
                Csr::build(1 << (2 * (k2 - 1)), n0),
                Csr::build(1 << (2 * k2), n1),
                Csr::build(1 << (2 * (k2 + 1)), n2),
            ],
            spaced: Csr::build((1 << (4 * k)) * 5, spaced_pairs),
        }
    } else {
        assert!(k <= 12, "seed length {k} too large for a direct table");
        let mut pairs = Vec::new();
        for (pi, pat) in patterns.iter().enumerate() {
            if windows(pat) == 0 {
                continue;
            }
            for q in 0..=pat.len() - k {
                pairs.push((pack(&pat[q..q + k]) as u32, (pi as u32) << POS_BITS | q as u32));
            }
        }
        Tables::Pigeonhole { seeds: Csr::build(1 << (2 * k), pairs) }
    };

    CollisionIndex {
        params: *params,
        library_size: lib.size(),
        patterns,
        pattern_primer,
        window_base,
        peq,
        k,
        tables,
    }
}

/// Union of the collision sets of all `frames`.
pub fn chunk_collision_set(frames: &[PayloadFrame], index: &CollisionIndex) -> CollisionSet {
    if let Some(first) = frames.first() {
        debug_assert!(frames.iter().all(|f| f.chunk_id == first.chunk_id), "frames from several chunks");
    }
    let mut out = CollisionSet::new(index.library_size);
    let mut codes = Vec::new();
    for f in frames {
        if out.count() == index.library_size {
            break;
        }
        codes.clear();
        codes.extend(f.payload.iter().map(|b| b.code()));
        index.scan_codes(&codes, &mut out);
    }
    out
}
