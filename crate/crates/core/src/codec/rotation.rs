//! Rotation code: binary to ternary, each trit picks one of the three bases
//! that differ from the previously written base.
//!
//! Input bits are grouped into 19-bit blocks (MSB first) and each block is
//! written as 12 trits. A final block that carries 11 or fewer data bits is
//! emitted as an escape value at or above 2^19 so the decoder can recover the
//! exact byte length without side information:
//! `2^19 + (r / 8) * 2048 + bits`, where `r` is the number of data bits and
//! `bits` holds them left-aligned in 11 bits. Since the bit count consumed
//! before the final block fixes `r mod 8`, the single `r / 8` flag suffices.

use super::{malformed, Base, BaseSeq, CodecError};

const BLOCK_BITS: u32 = 19;
const BLOCK_TRITS: usize = 12;
const ESCAPE: u32 = 1 << BLOCK_BITS;
const ESCAPE_SPAN: u32 = 2 << 11;

#[inline]
fn next_base(prev: Base, trit: u32) -> Base {
    let mut t = trit as u8;
    for b in Base::ALL {
        if b == prev {
            continue;
        }
        if t == 0 {
            return b;
        }
        t -= 1;
    }
    unreachable!("trit out of range")
}

#[inline]
fn trit_of(prev: Base, b: Base) -> Option<u32> {
    if b == prev {
        return None;
    }
    Some(if b < prev { b.code() } else { b.code() - 1 } as u32)
}

struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl BitReader<'_> {
    fn remaining(&self) -> usize {
        self.data.len() * 8 - self.pos
    }

    /// Reads up to `n` bits MSB-first; returns the value and the count read.
    fn read(&mut self, n: usize) -> (u32, usize) {
        let take = n.min(self.remaining());
        let mut v = 0u32;
        for _ in 0..take {
            let byte = self.data[self.pos / 8];
            let bit = (byte >> (7 - self.pos % 8)) & 1;
            v = (v << 1) | bit as u32;
            self.pos += 1;
        }
        (v, take)
    }
}

#[derive(Default)]
struct BitWriter {
    out: Vec<u8>,
    acc: u64,
    nbits: u32,
}

impl BitWriter {
    fn write(&mut self, value: u32, n: u32) {
        self.acc = (self.acc << n) | (value as u64 & ((1u64 << n) - 1));
        self.nbits += n;
        while self.nbits >= 8 {
            self.nbits -= 8;
            self.out.push((self.acc >> self.nbits) as u8);
        }
        self.acc &= (1u64 << self.nbits) - 1;
    }
}

pub fn encode_rotation(data: &[u8]) -> BaseSeq {
    let total_bits = data.len() * 8;
    let blocks = total_bits.div_ceil(BLOCK_BITS as usize);
    let mut out = BaseSeq::with_capacity(blocks * BLOCK_TRITS);
    let mut reader = BitReader { data, pos: 0 };
    let mut prev = Base::A;
    let mut trits = [0u32; BLOCK_TRITS];
    for i in 0..blocks {
        let (bits, r) = reader.read(BLOCK_BITS as usize);
        let mut value = bits << (BLOCK_BITS as usize - r);
        if i + 1 == blocks && r <= 11 {
            value = ESCAPE + (r as u32 / 8) * 2048 + (bits << (11 - r));
        }
        for slot in trits.iter_mut().rev() {
            *slot = value % 3;
            value /= 3;
        }
        for &t in &trits {
            prev = next_base(prev, t);
            out.push(prev);
        }
    }
    out
}

pub fn decode_rotation(seq: &BaseSeq) -> Result<Vec<u8>, CodecError> {
    if seq.len() % BLOCK_TRITS != 0 {
        return Err(malformed(format!(
            "rotation length {} is not a multiple of {BLOCK_TRITS}",
            seq.len()
        )));
    }
    let blocks = seq.len() / BLOCK_TRITS;
    let mut w = BitWriter::default();
    let mut prev = Base::A;
    for (i, block) in seq.chunks(BLOCK_TRITS).enumerate() {
        let mut value = 0u32;
        for (j, &b) in block.iter().enumerate() {
            let t = trit_of(prev, b).ok_or_else(|| {
                malformed(format!("repeated base at position {}", i * BLOCK_TRITS + j))
            })?;
            value = value * 3 + t;
            prev = b;
        }
        let last = i + 1 == blocks;
        if value < ESCAPE {
            if last {
                let total = BLOCK_BITS as usize * blocks;
                let pad = (total % 8) as u32;
                if value & ((1 << pad) - 1) != 0 {
                    return Err(malformed("non-zero padding in final rotation block"));
                }
                w.write(value >> pad, BLOCK_BITS - pad);
            } else {
                w.write(value, BLOCK_BITS);
            }
            continue;
        }
        if !last {
            return Err(malformed(format!("escape value in non-final block {i}")));
        }
        let rest = value - ESCAPE;
        if rest >= ESCAPE_SPAN {
            return Err(malformed(format!("rotation block value {value} out of range")));
        }
        let consumed = BLOCK_BITS as usize * i;
        let r = (rest / 2048) as usize * 8 + (8 - consumed % 8) % 8;
        if r == 0 || r > 11 {
            return Err(malformed("invalid escape length in final rotation block"));
        }
        let bits = rest % 2048;
        if bits & ((1 << (11 - r)) - 1) != 0 {
            return Err(malformed("non-zero padding in final rotation block"));
        }
        w.write(bits >> (11 - r), r as u32);
    }
    debug_assert_eq!(w.nbits, 0);
    Ok(w.out)
}
