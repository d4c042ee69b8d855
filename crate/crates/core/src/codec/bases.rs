use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CodecError;

/// A single nucleotide. The discriminant doubles as the 2-bit code used
/// throughout the crate, and the declaration order is the canonical
/// lexicographic order `A < C < G < T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Base {
    A = 0,
    C = 1,
    G = 2,
    T = 3,
}

impl Base {
    pub const ALL: [Base; 4] = [Base::A, Base::C, Base::G, Base::T];

    #[inline]
    pub fn from_code(code: u8) -> Base {
        Base::ALL[(code & 3) as usize]
    }

    #[inline]
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_char(c: char) -> Option<Base> {
        match c {
            'A' | 'a' => Some(Base::A),
            'C' | 'c' => Some(Base::C),
            'G' | 'g' => Some(Base::G),
            'T' | 't' => Some(Base::T),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Base::A => 'A',
            Base::C => 'C',
            Base::G => 'G',
            Base::T => 'T',
        }
    }

    #[inline]
    pub fn is_gc(self) -> bool {
        matches!(self, Base::C | Base::G)
    }

    pub fn complement(self) -> Base {
        Base::from_code(3 - self.code())
    }
}

/// A DNA sequence over `{A, C, G, T}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BaseSeq(Vec<Base>);

impl BaseSeq {
    pub fn new() -> Self {
        BaseSeq(Vec::new())
    }

    pub fn with_capacity(n: usize) -> Self {
        BaseSeq(Vec::with_capacity(n))
    }

    pub fn from_bases(bases: Vec<Base>) -> Self {
        BaseSeq(bases)
    }

    /// Builds a sequence from 2-bit codes; only the low two bits of each code are used.
    pub fn from_codes(codes: &[u8]) -> Self {
        BaseSeq(codes.iter().map(|&c| Base::from_code(c)).collect())
    }

    pub fn push(&mut self, b: Base) {
        self.0.push(b);
    }

    pub fn extend_from_slice(&mut self, other: &[Base]) {
        self.0.extend_from_slice(other);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Base] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Base> {
        self.0
    }

    pub fn last(&self) -> Option<Base> {
        self.0.last().copied()
    }

    pub fn codes(&self) -> Vec<u8> {
        self.0.iter().map(|b| b.code()).collect()
    }

    pub fn gc_count(&self) -> usize {
        self.0.iter().filter(|b| b.is_gc()).count()
    }

    /// Length of the longest run of one repeated base.
    pub fn max_homopolymer(&self) -> usize {
        max_run(&self.0)
    }

    pub fn reverse_complement(&self) -> BaseSeq {
        BaseSeq(self.0.iter().rev().map(|b| b.complement()).collect())
    }
}

pub(crate) fn max_run(bases: &[Base]) -> usize {
    let mut best = 0;
    let mut run = 0;
    let mut prev = None;
    for &b in bases {
        if Some(b) == prev {
            run += 1;
        } else {
            run = 1;
            prev = Some(b);
        }
        best = best.max(run);
    }
    best
}

impl std::ops::Deref for BaseSeq {
    type Target = [Base];

    fn deref(&self) -> &[Base] {
        &self.0
    }
}

impl FromIterator<Base> for BaseSeq {
    fn from_iter<I: IntoIterator<Item = Base>>(iter: I) -> Self {
        BaseSeq(iter.into_iter().collect())
    }
}

impl fmt::Display for BaseSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.0.iter().map(|b| b.to_char()).collect();
        f.write_str(&s)
    }
}

impl FromStr for BaseSeq {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .enumerate()
            .map(|(i, c)| Base::from_char(c).ok_or(CodecError::InvalidBase { position: i, found: c }))
            .collect()
    }
}
