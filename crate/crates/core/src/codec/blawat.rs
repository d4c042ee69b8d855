//! Byte-per-five-bases code.
//!
//! Bases 1, 2, 4 and 5 carry the byte's bit pairs (high to low). Base 3 is one
//! of the two lowest bases that differ from base 2, so bases 1-3 never form a
//! run. Which of the two is used is a one-bit offset `o`: the written base 5 is
//! `(b5 + o) mod 4`. The encoder sets `o = 1` exactly when the unrotated base 5
//! would equal the first base of the next block, which keeps block boundaries
//! free of repeats. The final block always uses `o = 0`.

use super::{malformed, Base, BaseSeq, CodecError};

const BLOCK: usize = 5;

#[inline]
fn third_candidates(b2: Base) -> [Base; 2] {
    let mut out = [Base::A; 2];
    let mut n = 0;
    for b in Base::ALL {
        if b != b2 && n < 2 {
            out[n] = b;
            n += 1;
        }
    }
    out
}

#[inline]
fn split(byte: u8) -> [Base; 4] {
    [
        Base::from_code(byte >> 6),
        Base::from_code(byte >> 4),
        Base::from_code(byte >> 2),
        Base::from_code(byte),
    ]
}

/// Block for `byte` with rotation offset `o`.
pub(crate) fn block(byte: u8, o: u8) -> [Base; BLOCK] {
    let [b1, b2, b4, b5] = split(byte);
    let b3 = third_candidates(b2)[o as usize];
    [b1, b2, b3, b4, Base::from_code(b5.code() + o)]
}

pub fn encode_blawat(data: &[u8]) -> BaseSeq {
    let mut out = BaseSeq::with_capacity(data.len() * BLOCK);
    for (i, &byte) in data.iter().enumerate() {
        let o = match data.get(i + 1) {
            Some(&next) if (byte & 3) == (next >> 6) => 1,
            _ => 0,
        };
        out.extend_from_slice(&block(byte, o));
    }
    out
}

pub fn decode_blawat(seq: &BaseSeq) -> Result<Vec<u8>, CodecError> {
    if seq.len() % BLOCK != 0 {
        return Err(malformed(format!(
            "blawat length {} is not a multiple of {BLOCK}",
            seq.len()
        )));
    }
    let blocks: Vec<&[Base]> = seq.chunks(BLOCK).collect();
    let mut out = Vec::with_capacity(blocks.len());
    for (i, blk) in blocks.iter().enumerate() {
        let [b1, b2, b3, b4, b5w] = [blk[0], blk[1], blk[2], blk[3], blk[4]];
        let o = third_candidates(b2)
            .iter()
            .position(|&c| c == b3)
            .ok_or_else(|| malformed(format!("block {i} is not a table entry")))? as u8;
        let b5 = Base::from_code(b5w.code().wrapping_sub(o));
        let expected = match blocks.get(i + 1) {
            Some(next) => u8::from(b5 == next[0]),
            None => 0,
        };
        if o != expected {
            return Err(malformed(format!("block {i} has a non-canonical offset")));
        }
        out.push(b1.code() << 6 | b2.code() << 4 | b4.code() << 2 | b5.code());
    }
    Ok(out)
}
