//! Context-aware triplet code at one bit per base.
//!
//! Each 3-bit value `v` has four candidate triplets, the ones whose base-4
//! index (first base most significant) is `v`, `v + 8`, `v + 16` or `v + 24`.
//! Decoding is `index mod 8`, so any choice inverts. The encoder picks the
//! candidate with the lowest penalty against the trailing context window:
//!
//! ```text
//! 1000 * [run > 3] + 1000 * |gc / len - 1/2| + longest repeated suffix
//! ```
//!
//! Scores are compared after multiplying through by `len`, so the arithmetic
//! stays integral. Ties go to the lowest candidate index.

use super::{malformed, Base, BaseSeq, CodecError};

pub const CAC_CONTEXT_WINDOW: usize = 17;

const LOW_BITS: u64 = 0x5555_5555_5555_5555;

/// Up to 32 bases packed two bits each, most recent base in the low bits.
#[inline]
fn packed_gc(x: u64, len: usize) -> u32 {
    let hi = (x >> 1) & LOW_BITS;
    let lo = x & LOW_BITS;
    ((hi ^ lo) & mask(len)).count_ones()
}

#[inline]
fn mask(len: usize) -> u64 {
    if len >= 32 {
        u64::MAX
    } else {
        (1u64 << (2 * len)) - 1
    }
}

/// Longest suffix of the packed sequence that also occurs ending at an
/// earlier position.
#[inline]
fn repeated_suffix(x: u64, len: usize) -> u32 {
    let mut best = 0;
    for d in 1..len {
        let room = (len - d) as u32;
        if room <= best {
            break;
        }
        let diff = (x ^ (x >> (2 * d))) & mask(len - d);
        let m = (diff.trailing_zeros() / 2).min(room);
        best = best.max(m);
    }
    best
}

#[inline]
fn trailing_run(x: u64, len: usize) -> u32 {
    if len == 0 {
        return 0;
    }
    let last = x & 3;
    let mut run = 1;
    while (run as usize) < len && (x >> (2 * run)) & 3 == last {
        run += 1;
    }
    run
}

fn penalty(hist: u64, hist_len: usize, cand: u64) -> u64 {
    let len = hist_len + 3;
    let combined = (hist << 6) | cand;
    let mut run = trailing_run(hist, hist_len);
    let mut last = if hist_len == 0 { u64::MAX } else { hist & 3 };
    let mut over = false;
    for shift in [4u32, 2, 0] {
        let b = (cand >> shift) & 3;
        run = if b == last { run + 1 } else { 1 };
        last = b;
        over |= run > 3;
    }
    let gc = packed_gc(combined, len) as i64;
    let l = len as u64;
    1000 * l * u64::from(over)
        + 500 * (2 * gc - len as i64).unsigned_abs()
        + l * repeated_suffix(combined, len) as u64
}

pub fn encode_cac_lite(data: &[u8], context_window: usize) -> BaseSeq {
    let window = context_window.min(29);
    let triplets = (data.len() * 8).div_ceil(3);
    let mut out = BaseSeq::with_capacity(triplets * 3);
    let mut hist = 0u64;
    let mut hist_len = 0usize;
    let mut bitpos = 0usize;
    for _ in 0..triplets {
        let mut v = 0u64;
        for _ in 0..3 {
            let bit = data
                .get(bitpos / 8)
                .map_or(0, |byte| (byte >> (7 - bitpos % 8)) & 1);
            v = (v << 1) | bit as u64;
            bitpos += 1;
        }
        let mut best = (u64::MAX, 0u64);
        for k in 0..4u64 {
            let cand = v + 8 * k;
            let p = penalty(hist, hist_len, cand);
            if p < best.0 {
                best = (p, cand);
            }
        }
        let cand = best.1;
        for shift in [4u32, 2, 0] {
            out.push(Base::from_code((cand >> shift) as u8));
        }
        hist = ((hist << 6) | cand) & mask(window);
        hist_len = (hist_len + 3).min(window);
    }
    out
}

pub fn decode_cac_lite(seq: &BaseSeq) -> Result<Vec<u8>, CodecError> {
    if seq.len() % 3 != 0 {
        return Err(malformed(format!("cac length {} is not a multiple of 3", seq.len())));
    }
    let triplets = seq.len() / 3;
    let nbytes = triplets * 3 / 8;
    let mut out = vec![0u8; nbytes];
    let mut bitpos = 0usize;
    for (i, t) in seq.chunks(3).enumerate() {
        let index = t[0].code() << 4 | t[1].code() << 2 | t[2].code();
        if index >= 32 {
            return Err(malformed(format!("triplet {i} is not a candidate")));
        }
        let v = index % 8;
        for s in (0..3).rev() {
            let bit = (v >> s) & 1;
            if bitpos < nbytes * 8 {
                out[bitpos / 8] |= bit << (7 - bitpos % 8);
            } else if bit != 0 {
                return Err(malformed("non-zero padding in final cac triplet"));
            }
            bitpos += 1;
        }
    }
    if triplets != (nbytes * 8).div_ceil(3) {
        return Err(malformed("cac triplet count does not match a whole byte length"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::max_run;
    use rand::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pack(s: &str) -> u64 {
        s.chars()
            .fold(0, |acc, c| (acc << 2) | Base::from_char(c).unwrap().code() as u64)
    }

    // Plain reference for the repeated-suffix term.
    fn repeated_suffix_slow(s: &[u8]) -> u32 {
        let n = s.len();
        (1..n)
            .rev()
            .find(|&len| {
                let suf = &s[n - len..];
                (0..n - len).any(|p| &s[p..p + len] == suf)
            })
            .unwrap_or(0) as u32
    }

    #[test]
    fn repeated_suffix_matches_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let len = 1 + (rng.next_u32() % 20) as usize;
            let s: Vec<u8> = (0..len).map(|_| (rng.next_u32() % 3) as u8).collect();
            let x = s.iter().fold(0u64, |a, &c| (a << 2) | c as u64);
            assert_eq!(repeated_suffix(x, len), repeated_suffix_slow(&s), "{s:?}");
        }
    }

    #[test]
    fn gc_and_runs() {
        assert_eq!(packed_gc(pack("ACGTGC"), 6), 4);
        assert_eq!(trailing_run(pack("ACTTT"), 5), 3);
        assert_eq!(trailing_run(pack("AAAA"), 2), 2);
    }

    #[test]
    fn density_and_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 0..64usize {
            let mut d = vec![0u8; n];
            rng.fill_bytes(&mut d);
            let e = encode_cac_lite(&d, CAC_CONTEXT_WINDOW);
            assert_eq!(e.len(), (n * 8).div_ceil(3) * 3);
            assert_eq!(decode_cac_lite(&e).unwrap(), d);
        }
    }

    #[test]
    fn any_candidate_decodes() {
        for v in 0..8u8 {
            for k in 0..4u8 {
                let i = v + 8 * k;
                let seq: BaseSeq = [i >> 4, i >> 2, i].iter().map(|&c| Base::from_code(c)).collect();
                // nine bits: one byte and a zero pad bit from the trailing AAA
                let mut three = seq.clone();
                three.extend_from_slice(&seq);
                three.extend_from_slice(&BaseSeq::from_codes(&[0, 0, 0]));
                let out = decode_cac_lite(&three).unwrap();
                assert_eq!(out[0] >> 2, v << 3 | v);
            }
        }
    }

    #[test]
    fn homopolymers_capped() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut d = vec![0u8; 10_000];
        rng.fill_bytes(&mut d);
        assert!(max_run(&encode_cac_lite(&d, CAC_CONTEXT_WINDOW)) <= 3);
        assert!(max_run(&encode_cac_lite(&[0u8; 512], CAC_CONTEXT_WINDOW)) <= 3);
    }

    #[test]
    fn rejects_malformed() {
        assert!(decode_cac_lite(&"ACGT".parse().unwrap()).is_err());
        // first base G: index >= 32
        assert!(decode_cac_lite(&"GAAAAAAAA".parse().unwrap()).is_err());
    }
}
