//! Bit-parallel approximate search (Myers, 1999) for patterns up to 64 bases.

use crate::codec::Base;

/// Match masks for one pattern: bit `i` of `peq[c]` is set when pattern[i] == c.
pub(crate) type Peq = [u64; 4];

pub(crate) fn build_peq(pattern: &[u8]) -> Peq {
    debug_assert!(!pattern.is_empty() && pattern.len() <= 64);
    let mut peq = [0u64; 4];
    for (i, &c) in pattern.iter().enumerate() {
        peq[c as usize & 3] |= 1 << i;
    }
    peq
}

/// True if some substring of `text` is within `k` edits of the pattern.
#[inline]
pub(crate) fn search(peq: &Peq, m: usize, text: &[u8], k: usize) -> bool {
    let mask = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let high = 1u64 << (m - 1);
    let mut pv = mask;
    let mut mv = 0u64;
    let mut score = m;
    if score <= k {
        return true;
    }
    for &c in text {
        let eq = peq[c as usize & 3];
        let xv = eq | mv;
        let xh = (((eq & pv).wrapping_add(pv)) ^ pv) | eq;
        let mut ph = mv | !(xh | pv);
        let mut mh = pv & xh;
        if ph & high != 0 {
            score += 1;
        } else if mh & high != 0 {
            score -= 1;
        }
        if score <= k {
            return true;
        }
        ph <<= 1;
        mh <<= 1;
        pv = (mh | !(xv | ph)) & mask;
        mv = ph & xv & mask;
    }
    false
}

/// Minimum edit distance between `pattern` and any substring of `text`.
pub fn myers_min_distance(pattern: &[Base], text: &[Base]) -> usize {
    assert!(!pattern.is_empty() && pattern.len() <= 64, "pattern length must be 1..=64");
    let p: Vec<u8> = pattern.iter().map(|b| b.code()).collect();
    let t: Vec<u8> = text.iter().map(|b| b.code()).collect();
    let peq = build_peq(&p);
    (0..=p.len()).find(|&k| search(&peq, p.len(), &t, k)).unwrap_or(p.len())
}
