//! Chunk-to-tube allocation.
//!
//! The collision-aware allocator repeatedly clusters the pending chunks by
//! merge priority, fills the fullest cluster with the best-matching outside
//! chunks, and seals it as a tube. Sequential and average-linkage (UPGMA)
//! allocators are provided as baselines.
//!
//! Ties are broken the same way everywhere: prefer the candidate with the
//! smaller resulting union popcount, then the lowest id.

mod engine;
mod pairs;
mod plan;
mod priority;
mod refine;

pub use engine::{initial_clustering, initial_clustering_upgma};
pub use pairs::{assign_pairs, retrieval_cost};
pub use plan::{allocate, allocate_sequential, allocate_upgma, allocate_with, plan_from_json, plan_to_json, PLAN_SCHEMA};
pub use priority::{merge_priority, Priority};
pub use refine::{refine_and_seal, refine_and_seal_upgma};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::capacity::{tube_capacity_bytes, CapacityParams};
use crate::collision::{CollisionError, CollisionSet};

pub const DEFAULT_CHUNK_BYTES: u64 = 4096;
pub const DEFAULT_K_LIMIT: usize = 5;

#[derive(Debug, Error)]
pub enum AllocError {
    #[error(transparent)]
    Collision(#[from] CollisionError),
    #[error("chunk {0} does not fit a tube on its own")]
    InfeasibleChunk(u32),
    #[error("tube needs {needed} primer pairs but only {available} are usable")]
    PairBudgetExceeded { needed: u64, available: u64 },
    #[error("file {0} is not in the plan")]
    UnknownFile(u32),
    #[error("unknown chunk id {0}")]
    UnknownChunk(u32),
    #[error("plan format error: {0}")]
    Format(String),
}

/// A unit of stored data and the primers its encoded strands collide with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub chunk_id: u32,
    pub file_id: u32,
    pub byte_len: u32,
    pub collisions: CollisionSet,
}

/// A group of chunks bound for one tube, with cached union and size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub cluster_id: u32,
    /// Member chunk ids, ascending.
    pub members: Vec<u32>,
    pub union_collisions: CollisionSet,
    pub total_bytes: u64,
}

impl Cluster {
    pub fn singleton(cluster_id: u32, chunk: &Chunk) -> Cluster {
        Cluster {
            cluster_id,
            members: vec![chunk.chunk_id],
            union_collisions: chunk.collisions.clone(),
            total_bytes: chunk.byte_len as u64,
        }
    }

    /// Recomputes the cached union and size from member chunks.
    pub fn recompute<'a>(&mut self, lookup: impl Fn(u32) -> &'a Chunk) {
        let mut u = CollisionSet::new(self.union_collisions.width());
        let mut bytes = 0;
        for &id in &self.members {
            let c = lookup(id);
            u.union_with(&c.collisions).expect("member width");
            bytes += c.byte_len as u64;
        }
        self.union_collisions = u;
        self.total_bytes = bytes;
    }

    pub fn capacity(&self, params: &CapacityParams) -> u64 {
        tube_capacity_bytes(params.library_size - self.union_collisions.count(), params)
    }

    pub fn is_feasible(&self, params: &CapacityParams) -> bool {
        self.total_bytes <= self.capacity(params)
    }
}

/// Bytes of one file placed on one primer pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSlot {
    pub pair_id: u32,
    /// Chunks with bytes on this pair; a chunk cut at a pair boundary appears
    /// on both pairs.
    pub chunk_ids: Vec<u32>,
    pub bytes: u64,
}

pub type PairAssignments = BTreeMap<u32, Vec<PairSlot>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SealedTube {
    pub tube_id: u32,
    pub chunks: Vec<u32>,
    pub total_bytes: u64,
    pub collided_primers: usize,
    pub usable_primers: usize,
    pub capacity_bytes: u64,
    pub pair_assignments: PairAssignments,
}

impl SealedTube {
    pub fn pairs_used(&self) -> usize {
        let mut ids: Vec<u32> = self.pair_assignments.values().flatten().map(|s| s.pair_id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuarantineReason {
    /// The chunk alone needs more bytes than its own usable primers provide.
    Infeasible,
    /// Collision set width differs from the library size.
    WidthMismatch,
    EmptyChunk,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarantineEntry {
    pub chunk_id: u32,
    pub reason: QuarantineReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Allocator {
    Aware,
    Sequential,
    Upgma,
}

impl Allocator {
    pub const ALL: [Allocator; 3] = [Allocator::Aware, Allocator::Sequential, Allocator::Upgma];

    pub fn name(self) -> &'static str {
        match self {
            Allocator::Aware => "aware",
            Allocator::Sequential => "sequential",
            Allocator::Upgma => "upgma",
        }
    }
}

impl std::fmt::Display for Allocator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Allocator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "aware" => Ok(Allocator::Aware),
            "sequential" => Ok(Allocator::Sequential),
            "upgma" => Ok(Allocator::Upgma),
            other => Err(format!("unknown allocator '{other}'")),
        }
    }
}

/// Tie-break rule; there is one, recorded in plans for clarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    SmallerUnionThenLowestId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AllocConfig {
    pub chunk_bytes: u64,
    pub k_seq_limit: usize,
    pub params: CapacityParams,
    #[serde(default)]
    pub tie_break: TieBreak,
}

impl AllocConfig {
    pub fn new(params: CapacityParams) -> Self {
        AllocConfig { chunk_bytes: DEFAULT_CHUNK_BYTES, k_seq_limit: DEFAULT_K_LIMIT, params, tie_break: TieBreak::default() }
    }

    pub fn library_size(&self) -> usize {
        self.params.library_size
    }

    #[inline]
    pub(crate) fn fits(&self, bytes: u64, union: usize) -> bool {
        union <= self.params.library_size && bytes <= tube_capacity_bytes(self.params.library_size - union, &self.params)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationPlan {
    pub allocator: Allocator,
    pub config: AllocConfig,
    pub library_size: usize,
    pub tubes: Vec<SealedTube>,
    pub quarantined: Vec<QuarantineEntry>,
    /// Sum over tubes of collided primers.
    pub objective: u64,
}

impl AllocationPlan {
    pub fn empty(allocator: Allocator, config: AllocConfig) -> Self {
        AllocationPlan {
            allocator,
            config,
            library_size: config.params.library_size,
            tubes: Vec::new(),
            quarantined: Vec::new(),
            objective: 0,
        }
    }

    /// Files present in the plan, ascending.
    pub fn file_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.tubes.iter().flat_map(|t| t.pair_assignments.keys().copied()).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn chunk_count(&self) -> usize {
        self.tubes.iter().map(|t| t.chunks.len()).sum::<usize>() + self.quarantined.len()
    }
}
