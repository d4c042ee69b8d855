//! Primer-payload collision detection.
//!
//! A primer collides with a payload when some length-`window_len` window of
//! the primer is within `max_edits` Levenshtein edits of some substring of
//! the payload. [`collides_oracle`] is the plain dynamic-programming
//! reference; [`CollisionIndex`] is the seeded detector used in the pipeline.

mod bitset;
mod dump;
mod index;
mod myers;
mod oracle;

pub use bitset::{set_intersection_count, set_union, set_union_count, CollisionSet};
pub use dump::{read_cset, write_cset, CSET_MAGIC, CSET_VERSION};
pub use index::{build_collision_index, chunk_collision_set, CollisionIndex, SeedStrategy};
pub use myers::myers_min_distance;
pub use oracle::{collides_oracle, window_min_distance};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CollisionError {
    #[error("collision sets have different widths ({left} vs {right})")]
    WidthMismatch { left: usize, right: usize },
    #[error("window length {window} exceeds primer length {primer}")]
    WindowTooLong { window: usize, primer: usize },
    #[error("invalid collision parameters: {0}")]
    InvalidParams(String),
    #[error("collision dump format error: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CollisionParams {
    pub window_len: usize,
    pub max_edits: usize,
    /// Also match the reverse complement of each primer.
    #[serde(default)]
    pub reverse_complement: bool,
}

impl Default for CollisionParams {
    fn default() -> Self {
        CollisionParams { window_len: 12, max_edits: 2, reverse_complement: false }
    }
}

impl CollisionParams {
    pub fn new(window_len: usize, max_edits: usize) -> Result<Self, CollisionError> {
        let p = CollisionParams { window_len, max_edits, reverse_complement: false };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), CollisionError> {
        if self.window_len == 0 {
            return Err(CollisionError::InvalidParams("window_len must be at least 1".into()));
        }
        if self.max_edits >= self.window_len {
            return Err(CollisionError::InvalidParams(format!(
                "max_edits {} must be below window_len {}",
                self.max_edits, self.window_len
            )));
        }
        Ok(())
    }

    /// Exact seed length guaranteed by the pigeonhole principle.
    pub fn seed_len(&self) -> usize {
        self.window_len / (self.max_edits + 1)
    }
}
