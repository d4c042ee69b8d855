//! encode -> collide -> allocate -> report.

use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tubealloc::codec::{frame_payloads, rs_encode};
use tubealloc::collision::{build_collision_index, chunk_collision_set, CollisionIndex};
use tubealloc::{allocate_with, AllocConfig, AllocationPlan, Allocator, CapacityParams, Chunk, CollisionParams, EncodingScheme, PrimerLibrary};

use crate::report::{report_from_plan, RunReport};
use crate::workload::{chunk_spans, generate_files, planted_chunks, FileData, Workload, WorkloadMode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub scheme: EncodingScheme,
    pub allocator: Allocator,
    pub chunk_bytes: u64,
    pub payload_len: u64,
    pub parallel_factor: u64,
    pub k_limit: usize,
    pub collision: CollisionParams,
}

impl Default for RunParams {
    fn default() -> Self {
        RunParams {
            scheme: EncodingScheme::Rotation,
            allocator: Allocator::Aware,
            chunk_bytes: tubealloc::alloc::DEFAULT_CHUNK_BYTES,
            payload_len: tubealloc::capacity::DEFAULT_PAYLOAD_LEN,
            parallel_factor: crate::DESK_PARALLEL_FACTOR,
            k_limit: tubealloc::alloc::DEFAULT_K_LIMIT,
            collision: CollisionParams::default(),
        }
    }
}

impl RunParams {
    pub fn alloc_config(&self, library_size: usize) -> Result<AllocConfig> {
        if self.chunk_bytes == 0 || self.chunk_bytes > u32::MAX as u64 {
            bail!("chunk size must be between 1 and {} bytes", u32::MAX);
        }
        if self.k_limit == 0 {
            bail!("k limit must be at least 1");
        }
        let params = CapacityParams::for_scheme(self.scheme, self.payload_len, self.parallel_factor, library_size)?;
        let mut cfg = AllocConfig::new(params);
        cfg.chunk_bytes = self.chunk_bytes;
        cfg.k_seq_limit = self.k_limit;
        Ok(cfg)
    }
}

/// Wall time per stage, in run order. Kept out of the report so that reports
/// stay byte-identical across runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub stages: Vec<(String, f64)>,
}

impl Timings {
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.stages.push((stage.to_string(), t.elapsed().as_secs_f64()));
        out
    }

    pub fn total(&self) -> f64 {
        self.stages.iter().map(|s| s.1).sum()
    }
}

/// Encodes and frames one chunk's bytes, then collects its collided primers.
pub fn chunk_of(bytes: &[u8], chunk_id: u32, file_id: u32, params: &RunParams, index: &CollisionIndex) -> Chunk {
    let seq = params.scheme.encode(&rs_encode(bytes));
    let frames = frame_payloads(&seq, chunk_id, params.payload_len as usize);
    Chunk { chunk_id, file_id, byte_len: bytes.len() as u32, collisions: chunk_collision_set(&frames, index) }
}

/// Collision-annotated chunks of `files` cut at `params.chunk_bytes`.
pub fn collide_files(files: &[FileData], params: &RunParams, index: &CollisionIndex) -> Vec<Chunk> {
    chunk_spans(files, params.chunk_bytes)
        .iter()
        .map(|s| chunk_of(&files[s.file_index].bytes[s.start..s.start + s.len], s.chunk_id, s.file_id, params, index))
        .collect()
}

pub fn build_index(lib: &PrimerLibrary, params: &RunParams) -> Result<CollisionIndex> {
    params.collision.validate()?;
    if params.collision.window_len > lib.primer_len {
        bail!("window length {} exceeds primer length {}", params.collision.window_len, lib.primer_len);
    }
    Ok(build_collision_index(lib, &params.collision))
}

/// Chunks for `workload`, with stage timings appended to `timings`.
pub fn build_chunks(lib: &PrimerLibrary, workload: &Workload, params: &RunParams, timings: &mut Timings) -> Result<Vec<Chunk>> {
    match workload.mode {
        WorkloadMode::PlantedCollisionSets => {
            let spec = workload.planted.context("planted workload without a planted spec")?;
            let bytes = u32::try_from(params.chunk_bytes).context("chunk size")?;
            timings.time("plant", || planted_chunks(workload.seed, &spec, lib.size(), bytes)).map_err(anyhow::Error::msg)
        }
        WorkloadMode::RandomBytes => {
            workload.file_size_distribution.validate().map_err(anyhow::Error::msg)?;
            let files = timings.time("generate", || generate_files(workload.seed, workload.total_bytes, &workload.file_size_distribution));
            let index = timings.time("index", || build_index(lib, params))?;
            Ok(timings.time("collide", || collide_files(&files, params, &index)))
        }
    }
}

pub struct RunOutput {
    pub plan: AllocationPlan,
    pub report: RunReport,
    pub timings: Timings,
}

pub fn run(lib: &PrimerLibrary, workload: &Workload, params: &RunParams) -> Result<RunOutput> {
    let cfg = params.alloc_config(lib.size())?;
    let mut timings = Timings::default();
    let chunks = build_chunks(lib, workload, params, &mut timings)?;
    let plan = timings.time("allocate", || allocate_with(params.allocator, &chunks, &cfg));
    let report = timings.time("report", || report_from_plan(&plan));
    Ok(RunOutput { plan, report, timings })
}
