use std::fmt;

use super::CollisionError;

/// Fixed-width bit vector over primer ids with a cached popcount.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CollisionSet {
    words: Vec<u64>,
    width: usize,
    count: usize,
}

impl CollisionSet {
    pub fn new(width: usize) -> Self {
        CollisionSet { words: vec![0; width.div_ceil(64)], width, count: 0 }
    }

    pub fn from_indices(width: usize, ids: impl IntoIterator<Item = usize>) -> Self {
        let mut s = CollisionSet::new(width);
        for i in ids {
            s.insert(i);
        }
        s
    }

    /// Builds a set from raw words; bits at or beyond `width` must be clear.
    pub fn from_words(width: usize, words: Vec<u64>) -> Self {
        assert_eq!(words.len(), width.div_ceil(64), "word count does not match width");
        if width % 64 != 0 {
            let tail = words[words.len() - 1] >> (width % 64);
            assert_eq!(tail, 0, "bits set beyond width");
        }
        let count = words.iter().map(|w| w.count_ones() as usize).sum();
        CollisionSet { words, width, count }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.width && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// Sets bit `i`; returns true if it was newly set.
    #[inline]
    pub fn insert(&mut self, i: usize) -> bool {
        assert!(i < self.width, "bit {i} out of range for width {}", self.width);
        let w = &mut self.words[i / 64];
        let m = 1u64 << (i % 64);
        if *w & m != 0 {
            return false;
        }
        *w |= m;
        self.count += 1;
        true
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    fn check(&self, other: &CollisionSet) -> Result<(), CollisionError> {
        if self.width != other.width {
            return Err(CollisionError::WidthMismatch { left: self.width, right: other.width });
        }
        Ok(())
    }

    pub fn union(&self, other: &CollisionSet) -> Result<CollisionSet, CollisionError> {
        let mut out = self.clone();
        out.union_with(other)?;
        Ok(out)
    }

    pub fn union_with(&mut self, other: &CollisionSet) -> Result<(), CollisionError> {
        self.check(other)?;
        let mut count = 0;
        for (a, &b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
            count += a.count_ones() as usize;
        }
        self.count = count;
        Ok(())
    }

    pub fn intersection_count(&self, other: &CollisionSet) -> Result<usize, CollisionError> {
        self.check(other)?;
        Ok(self.intersection_count_unchecked(other))
    }

    pub fn union_count(&self, other: &CollisionSet) -> Result<usize, CollisionError> {
        self.check(other)?;
        Ok(self.count + other.count - self.intersection_count_unchecked(other))
    }

    #[inline]
    pub(crate) fn intersection_count_unchecked(&self, other: &CollisionSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Whether every bit of `self` is also set in `other`.
    pub fn is_subset(&self, other: &CollisionSet) -> bool {
        self.width == other.width && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Little-endian bit order: bit `i` lives in byte `i / 8` at position `i % 8`.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        out.truncate(self.width.div_ceil(8));
        out
    }

    pub fn from_le_bytes(width: usize, bytes: &[u8]) -> Result<CollisionSet, CollisionError> {
        if bytes.len() != width.div_ceil(8) {
            return Err(CollisionError::Format(format!(
                "bit vector of {} bytes for width {width}",
                bytes.len()
            )));
        }
        let mut words = vec![0u64; width.div_ceil(64)];
        for (i, &b) in bytes.iter().enumerate() {
            words[i / 8] |= (b as u64) << (8 * (i % 8));
        }
        if width % 64 != 0 && words[words.len() - 1] >> (width % 64) != 0 {
            return Err(CollisionError::Format("bits set beyond library size".into()));
        }
        Ok(CollisionSet::from_words(width, words))
    }
}

impl fmt::Debug for CollisionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CollisionSet(width={}, ", self.width)?;
        f.debug_set().entries(self.iter()).finish()?;
        f.write_str(")")
    }
}

pub fn set_union(a: &CollisionSet, b: &CollisionSet) -> Result<CollisionSet, CollisionError> {
    a.union(b)
}

pub fn set_intersection_count(a: &CollisionSet, b: &CollisionSet) -> Result<usize, CollisionError> {
    a.intersection_count(b)
}

pub fn set_union_count(a: &CollisionSet, b: &CollisionSet) -> Result<usize, CollisionError> {
    a.union_count(b)
}
