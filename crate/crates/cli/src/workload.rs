//! Seeded synthetic workloads.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tubealloc::{Chunk, CollisionSet};

/// File-size mixture: a `small_fraction` of files is uniform in
/// `[1, small_max)`, the rest uniform in `[small_max, large_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FileSizeMix {
    pub small_fraction: f64,
    pub small_max: u64,
    pub large_max: u64,
}

impl Default for FileSizeMix {
    fn default() -> Self {
        FileSizeMix { small_fraction: 0.4, small_max: 256 * 1024, large_max: 4 * 1024 * 1024 }
    }
}

impl FileSizeMix {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.small_fraction) {
            return Err(format!("small fraction {} is not in [0, 1]", self.small_fraction));
        }
        if self.small_max < 2 || self.large_max < self.small_max {
            return Err("file size bounds must satisfy 2 <= small_max <= large_max".into());
        }
        Ok(())
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> u64 {
        if rng.gen_bool(self.small_fraction) {
            rng.gen_range(1..self.small_max)
        } else {
            rng.gen_range(self.small_max..=self.large_max)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedSpec {
    pub groups: usize,
    pub primers_per_group: usize,
    pub chunks_per_group: usize,
    /// Each chunk collides with this many primers of its group.
    pub primers_per_chunk: usize,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        PlantedSpec { groups: 5, primers_per_group: 40, chunks_per_group: 400, primers_per_chunk: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkloadMode {
    RandomBytes,
    PlantedCollisionSets,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workload {
    pub mode: WorkloadMode,
    pub seed: u64,
    pub total_bytes: u64,
    pub file_size_distribution: FileSizeMix,
    pub planted: Option<PlantedSpec>,
}

impl Workload {
    pub fn random(seed: u64, total_bytes: u64) -> Self {
        Workload {
            mode: WorkloadMode::RandomBytes,
            seed,
            total_bytes,
            file_size_distribution: FileSizeMix::default(),
            planted: None,
        }
    }

    pub fn planted(seed: u64, spec: PlantedSpec, chunk_bytes: u64) -> Self {
        Workload {
            mode: WorkloadMode::PlantedCollisionSets,
            seed,
            total_bytes: (spec.groups * spec.chunks_per_group) as u64 * chunk_bytes,
            file_size_distribution: FileSizeMix::default(),
            planted: Some(spec),
        }
    }
}

/// One synthetic file of pseudo-random bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileData {
    pub file_id: u32,
    pub bytes: Vec<u8>,
}

/// Files summing to exactly `total_bytes`; the last file is truncated.
pub fn generate_files(seed: u64, total_bytes: u64, mix: &FileSizeMix) -> Vec<FileData> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut files = Vec::new();
    let mut left = total_bytes;
    while left > 0 {
        let size = mix.draw(&mut rng).min(left);
        let mut bytes = vec![0u8; size as usize];
        rng.fill_bytes(&mut bytes);
        files.push(FileData { file_id: files.len() as u32, bytes });
        left -= size;
    }
    files
}

/// A slice of a file destined to become one chunk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkSpan {
    pub chunk_id: u32,
    pub file_id: u32,
    pub file_index: usize,
    pub start: usize,
    pub len: usize,
}

/// Cuts every file into `chunk_bytes` pieces (the last piece of a file may be
/// shorter). Chunk ids run in file order.
pub fn chunk_spans(files: &[FileData], chunk_bytes: u64) -> Vec<ChunkSpan> {
    assert!(chunk_bytes > 0);
    let mut spans = Vec::new();
    for (fi, f) in files.iter().enumerate() {
        let mut start = 0;
        while start < f.bytes.len() {
            let len = (chunk_bytes as usize).min(f.bytes.len() - start);
            spans.push(ChunkSpan { chunk_id: spans.len() as u32, file_id: f.file_id, file_index: fi, start, len });
            start += len;
        }
    }
    spans
}

/// Chunks with planted collision sets over disjoint primer blocks.
///
/// Group `g` owns primers `g*ppg..(g+1)*ppg`; each chunk collides with
/// `primers_per_chunk` primers drawn from its group's block. Chunk `i`
/// belongs to group `i % groups`, so groups are interleaved in id order.
/// Files hold runs of 8 chunks of the same group.
pub fn planted_chunks(seed: u64, spec: &PlantedSpec, library_size: usize, chunk_bytes: u32) -> Result<Vec<Chunk>, String> {
    if spec.groups == 0 || spec.chunks_per_group == 0 || spec.primers_per_group == 0 {
        return Err("planted workload needs at least one group, primer and chunk".into());
    }
    if spec.groups * spec.primers_per_group > library_size {
        return Err(format!(
            "{} groups of {} primers exceed the library of {library_size}",
            spec.groups, spec.primers_per_group
        ));
    }
    if spec.primers_per_chunk > spec.primers_per_group {
        return Err("primers per chunk exceed primers per group".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let files_per_group = spec.chunks_per_group.div_ceil(8);
    Ok((0..spec.groups * spec.chunks_per_group)
        .map(|i| {
            let (g, j) = (i % spec.groups, i / spec.groups);
            let lo = g * spec.primers_per_group;
            let mut ids: Vec<usize> = (lo..lo + spec.primers_per_group).collect();
            let (picked, _) = ids.partial_shuffle(&mut rng, spec.primers_per_chunk);
            Chunk {
                chunk_id: i as u32,
                file_id: (g * files_per_group + j / 8) as u32,
                byte_len: chunk_bytes,
                collisions: CollisionSet::from_indices(library_size, picked.iter().copied()),
            }
        })
        .collect())
}
