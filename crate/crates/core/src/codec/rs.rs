//! Reed-Solomon RS(255, 239) over GF(2^8) with primitive polynomial 0x11d.
//!
//! Codewords are systematic (data bytes first, then 16 parity bytes). Input is
//! cut into 239-byte blocks; a trailing partial block is encoded as a
//! shortened codeword of `len + 16` bytes, so `rs_encode` never pads.
//! The generator polynomial has roots `α^0 .. α^15`, which lets the decoder
//! correct up to 8 byte errors per codeword.

use super::CodecError;

pub const RS_N: usize = 255;
pub const RS_K: usize = 239;
pub const RS_PARITY: usize = RS_N - RS_K;
const T: usize = RS_PARITY / 2;

const PRIM_POLY: u16 = 0x11d;

struct Gf {
    exp: [u8; 512],
    log: [u8; 256],
}

const GF: Gf = build_tables();

const fn build_tables() -> Gf {
    let mut exp = [0u8; 512];
    let mut log = [0u8; 256];
    let mut x: u16 = 1;
    let mut i = 0;
    while i < 255 {
        exp[i] = x as u8;
        log[x as usize] = i as u8;
        x <<= 1;
        if x & 0x100 != 0 {
            x ^= PRIM_POLY;
        }
        i += 1;
    }
    while i < 512 {
        exp[i] = exp[i - 255];
        i += 1;
    }
    Gf { exp, log }
}

#[inline]
fn mul(a: u8, b: u8) -> u8 {
    if a == 0 || b == 0 {
        return 0;
    }
    GF.exp[GF.log[a as usize] as usize + GF.log[b as usize] as usize]
}

#[inline]
fn div(a: u8, b: u8) -> u8 {
    debug_assert!(b != 0);
    if a == 0 {
        return 0;
    }
    GF.exp[GF.log[a as usize] as usize + 255 - GF.log[b as usize] as usize]
}

#[inline]
fn alpha_pow(e: usize) -> u8 {
    GF.exp[e % 255]
}

#[inline]
fn inv(a: u8) -> u8 {
    div(1, a)
}

/// Generator coefficients, highest degree first, leading 1 omitted.
fn generator() -> [u8; RS_PARITY] {
    // g(x) = prod_{i<16} (x + α^i), stored low-degree-first while building.
    let mut g = vec![1u8];
    for i in 0..RS_PARITY {
        let root = alpha_pow(i);
        let mut next = vec![0u8; g.len() + 1];
        for (j, &c) in g.iter().enumerate() {
            next[j] ^= mul(c, root);
            next[j + 1] ^= c;
        }
        g = next;
    }
    let mut out = [0u8; RS_PARITY];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = g[RS_PARITY - 1 - k];
    }
    out
}

fn parity(block: &[u8], gen: &[u8; RS_PARITY]) -> [u8; RS_PARITY] {
    let mut reg = [0u8; RS_PARITY];
    for &d in block {
        let fb = d ^ reg[0];
        reg.copy_within(1.., 0);
        reg[RS_PARITY - 1] = 0;
        if fb != 0 {
            for (r, &g) in reg.iter_mut().zip(gen.iter()) {
                *r ^= mul(fb, g);
            }
        }
    }
    reg
}

/// Encodes `data` into consecutive RS(255,239) codewords.
pub fn rs_encode(data: &[u8]) -> Vec<u8> {
    let gen = generator();
    let mut out = Vec::with_capacity(encoded_len(data.len()));
    for block in data.chunks(RS_K) {
        out.extend_from_slice(block);
        out.extend_from_slice(&parity(block, &gen));
    }
    out
}

/// Output length of [`rs_encode`] for `n` input bytes.
pub fn encoded_len(n: usize) -> usize {
    n + n.div_ceil(RS_K) * RS_PARITY
}

/// Decodes and error-corrects a stream produced by [`rs_encode`].
pub fn rs_decode(code: &[u8]) -> Result<Vec<u8>, CodecError> {
    let tail = code.len() % RS_N;
    if tail != 0 && tail <= RS_PARITY {
        return Err(CodecError::MalformedLength { len: code.len() });
    }
    let mut out = Vec::with_capacity(code.len());
    for (index, cw) in code.chunks(RS_N).enumerate() {
        let mut buf = cw.to_vec();
        correct_codeword(&mut buf).map_err(|_| CodecError::UncorrectableCodeword(index))?;
        out.extend_from_slice(&buf[..buf.len() - RS_PARITY]);
    }
    Ok(out)
}

fn syndromes(cw: &[u8]) -> [u8; RS_PARITY] {
    let mut s = [0u8; RS_PARITY];
    for (j, slot) in s.iter_mut().enumerate() {
        let x = alpha_pow(j);
        let mut acc = 0u8;
        for &c in cw {
            acc = mul(acc, x) ^ c;
        }
        *slot = acc;
    }
    s
}

struct Uncorrectable;

fn correct_codeword(cw: &mut [u8]) -> Result<usize, Uncorrectable> {
    let n = cw.len();
    let s = syndromes(cw);
    if s.iter().all(|&v| v == 0) {
        return Ok(0);
    }

    // Berlekamp-Massey; polynomials stored low degree first.
    let mut lambda = vec![1u8];
    let mut prev = vec![1u8];
    let mut l = 0usize;
    let mut shift = 1usize;
    let mut b = 1u8;
    for step in 0..RS_PARITY {
        let mut d = s[step];
        for i in 1..=l.min(lambda.len() - 1) {
            d ^= mul(lambda[i], s[step - i]);
        }
        if d == 0 {
            shift += 1;
            continue;
        }
        let coef = div(d, b);
        let mut next = lambda.clone();
        if next.len() < prev.len() + shift {
            next.resize(prev.len() + shift, 0);
        }
        for (i, &p) in prev.iter().enumerate() {
            next[i + shift] ^= mul(coef, p);
        }
        if 2 * l <= step {
            prev = std::mem::replace(&mut lambda, next);
            l = step + 1 - l;
            b = d;
            shift = 1;
        } else {
            lambda = next;
            shift += 1;
        }
    }
    while lambda.len() > 1 && *lambda.last().unwrap() == 0 {
        lambda.pop();
    }
    let degree = lambda.len() - 1;
    if degree == 0 || degree > T || degree != l {
        return Err(Uncorrectable);
    }

    // Chien search over the (possibly shortened) codeword positions.
    let mut positions = Vec::with_capacity(degree);
    for i in 0..n {
        let power = n - 1 - i;
        let x_inv = alpha_pow(255 - power % 255);
        if eval_low_first(&lambda, x_inv) == 0 {
            positions.push(i);
        }
    }
    if positions.len() != degree {
        return Err(Uncorrectable);
    }

    // Forney: e = X * Omega(X^-1) / Lambda'(X^-1) for first consecutive root α^0.
    let mut omega = vec![0u8; RS_PARITY];
    for (i, &si) in s.iter().enumerate() {
        for (j, &lj) in lambda.iter().enumerate() {
            if i + j < RS_PARITY {
                omega[i + j] ^= mul(si, lj);
            }
        }
    }
    let derivative: Vec<u8> = lambda
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| if i % 2 == 1 { c } else { 0 })
        .collect();
    for &i in &positions {
        let power = n - 1 - i;
        let x = alpha_pow(power);
        let x_inv = inv(x);
        let denom = eval_low_first(&derivative, x_inv);
        if denom == 0 {
            return Err(Uncorrectable);
        }
        let magnitude = mul(x, div(eval_low_first(&omega, x_inv), denom));
        cw[i] ^= magnitude;
    }

    if syndromes(cw).iter().any(|&v| v != 0) {
        return Err(Uncorrectable);
    }
    Ok(positions.len())
}

fn eval_low_first(poly: &[u8], x: u8) -> u8 {
    poly.iter().rev().fold(0u8, |acc, &c| mul(acc, x) ^ c)
}
