//! GF(47) triplet code: each 16-bit block becomes three base-47 digits and
//! each digit one of 47 triplets whose second and third bases differ.
//!
//! An odd trailing byte is written as two digits (six bases), so valid
//! sequence lengths are 0 or 6 modulo 9.

use std::sync::OnceLock;

use super::{malformed, Base, BaseSeq, CodecError};

pub const GRASS_DIGITS: usize = 47;

/// The 47 triplets in canonical order: lexicographic, second != third,
/// with the largest such triplet (`TTG`) dropped.
pub fn grass_triplets() -> &'static [[Base; 3]; GRASS_DIGITS] {
    static TABLE: OnceLock<[[Base; 3]; GRASS_DIGITS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = [[Base::A; 3]; GRASS_DIGITS];
        let mut n = 0;
        for i in 0..64u8 {
            let t = [Base::from_code(i >> 4), Base::from_code(i >> 2), Base::from_code(i)];
            if t[1] != t[2] && n < GRASS_DIGITS {
                out[n] = t;
                n += 1;
            }
        }
        out
    })
}

fn digit_of(t: &[Base]) -> Option<u32> {
    static INV: OnceLock<[u8; 64]> = OnceLock::new();
    let inv = INV.get_or_init(|| {
        let mut inv = [u8::MAX; 64];
        for (d, t) in grass_triplets().iter().enumerate() {
            inv[(t[0].code() << 4 | t[1].code() << 2 | t[2].code()) as usize] = d as u8;
        }
        inv
    });
    match inv[(t[0].code() << 4 | t[1].code() << 2 | t[2].code()) as usize] {
        u8::MAX => None,
        d => Some(d as u32),
    }
}

fn push_digits(out: &mut BaseSeq, mut value: u32, count: usize) {
    let mut digits = [0u32; 3];
    for slot in digits[..count].iter_mut().rev() {
        *slot = value % GRASS_DIGITS as u32;
        value /= GRASS_DIGITS as u32;
    }
    for &d in &digits[..count] {
        out.extend_from_slice(&grass_triplets()[d as usize]);
    }
}

pub fn encode_grass(data: &[u8]) -> BaseSeq {
    let mut out = BaseSeq::with_capacity(data.len() / 2 * 9 + 6);
    let mut pairs = data.chunks_exact(2);
    for p in pairs.by_ref() {
        push_digits(&mut out, (p[0] as u32) << 8 | p[1] as u32, 3);
    }
    if let [last] = pairs.remainder() {
        push_digits(&mut out, *last as u32, 2);
    }
    out
}

fn read_digits(seq: &[Base]) -> Result<u32, CodecError> {
    let mut v = 0u32;
    for t in seq.chunks(3) {
        let d = digit_of(t).ok_or_else(|| malformed(format!("invalid grass triplet {t:?}")))?;
        v = v * GRASS_DIGITS as u32 + d;
    }
    Ok(v)
}

pub fn decode_grass(seq: &BaseSeq) -> Result<Vec<u8>, CodecError> {
    let tail = seq.len() % 9;
    if tail != 0 && tail != 6 {
        return Err(malformed(format!("grass length {} is not 0 or 6 mod 9", seq.len())));
    }
    let mut out = Vec::with_capacity(seq.len() / 9 * 2 + 1);
    let (body, rest) = seq.split_at(seq.len() - tail);
    for block in body.chunks(9) {
        let v = read_digits(block)?;
        if v >= 1 << 16 {
            return Err(malformed(format!("grass block value {v} exceeds 16 bits")));
        }
        out.push((v >> 8) as u8);
        out.push(v as u8);
    }
    if !rest.is_empty() {
        let v = read_digits(rest)?;
        if v >= 1 << 8 {
            return Err(malformed(format!("grass tail value {v} exceeds 8 bits")));
        }
        out.push(v as u8);
    }
    Ok(out)
}
