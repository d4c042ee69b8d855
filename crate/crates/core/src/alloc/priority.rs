use std::cmp::Ordering;

use super::{AllocError, Cluster};

/// `(1 + |A ∩ B|) / (1 + |A ∪ B|)`, kept as an exact fraction.
#[derive(Debug, Clone, Copy)]
pub struct Priority {
    pub num: u64,
    pub den: u64,
}

impl Priority {
    #[inline]
    pub fn from_counts(inter: usize, union: usize) -> Priority {
        Priority { num: 1 + inter as u64, den: 1 + union as u64 }
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// UPGMA chunk distance `1 - priority`.
    pub fn distance(self) -> f64 {
        (self.den - self.num) as f64 / self.den as f64
    }
}

impl PartialEq for Priority {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Priority {}

impl PartialOrd for Priority {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Priority {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

pub fn merge_priority(a: &Cluster, b: &Cluster) -> Result<Priority, AllocError> {
    let inter = a.union_collisions.intersection_count(&b.union_collisions)?;
    let union = a.union_collisions.count() + b.union_collisions.count() - inter;
    Ok(Priority::from_counts(inter, union))
}

/// Ordering key for a candidate merge; greater is preferred.
pub(crate) trait MergeKey: Ord + Copy + std::fmt::Debug {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct AwareKey {
    pub priority: Priority,
    pub union: u32,
    pub lo: u32,
    pub hi: u32,
}

impl Ord for AwareKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .cmp(&other.priority)
            .then(other.union.cmp(&self.union))
            .then(other.lo.cmp(&self.lo))
            .then(other.hi.cmp(&self.hi))
    }
}

impl PartialOrd for AwareKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl MergeKey for AwareKey {}

#[derive(Debug, Clone, Copy)]
pub(crate) struct UpgmaKey {
    pub distance: f64,
    pub union: u32,
    pub lo: u32,
    pub hi: u32,
}

impl Ord for UpgmaKey {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .distance
            .total_cmp(&self.distance)
            .then(other.union.cmp(&self.union))
            .then(other.lo.cmp(&self.lo))
            .then(other.hi.cmp(&self.hi))
    }
}

impl PartialOrd for UpgmaKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for UpgmaKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for UpgmaKey {}

impl MergeKey for UpgmaKey {}
