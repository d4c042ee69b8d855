//! Collision-aware data allocation for multi-tube DNA storage.
//!
//! Data is split into chunks, encoded into DNA payloads and checked against a
//! primer library for near matches. Chunks that collide with the same primers
//! are packed into the same tube, so that more primers stay usable per tube.

pub mod alloc;
pub mod capacity;
pub mod codec;
pub mod collision;
pub mod primerlib;

pub use alloc::{
    allocate, allocate_sequential, allocate_upgma, allocate_with, AllocConfig, AllocError, AllocationPlan, Allocator,
    Chunk, Cluster, SealedTube,
};
pub use capacity::{pair_capacity_bytes, tube_capacity_bytes, CapacityParams};
pub use codec::EncodingScheme;
pub use collision::{CollisionParams, CollisionSet};
pub use primerlib::PrimerLibrary;
