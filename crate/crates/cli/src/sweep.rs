//! Chunk-size sweep over one fixed workload.

use std::io::Write;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use tubealloc::{allocate_with, PrimerLibrary};

use crate::pipeline::{build_index, collide_files, RunParams};
use crate::report::{report_from_plan, Ratio, RunReport};
use crate::workload::{generate_files, FileSizeMix};

pub const DEFAULT_SWEEP_SIZES: [u64; 5] = [1024, 4096, 16 * 1024, 256 * 1024, 1024 * 1024];

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub chunk_bytes: u64,
    pub avg_collided_per_chunk: Ratio,
    pub report: RunReport,
    /// Seconds spent on collision detection and allocation at this size.
    pub wall_time: f64,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    chunk_bytes: u64,
    avg_collided_primers_per_chunk: &'a str,
    avg_tube_capacity: &'a str,
    avg_sequencings_per_file: &'a str,
    wall_time: String,
}

/// Runs the pipeline once per chunk size on the same files. The collision
/// index and the files are built once and shared by every size.
pub fn sweep(lib: &PrimerLibrary, seed: u64, total_bytes: u64, mix: &FileSizeMix, params: &RunParams, sizes: &[u64]) -> Result<Vec<SweepPoint>> {
    mix.validate().map_err(anyhow::Error::msg)?;
    let files = generate_files(seed, total_bytes, mix);
    let index = build_index(lib, params)?;
    sizes
        .iter()
        .map(|&chunk_bytes| {
            let p = RunParams { chunk_bytes, ..*params };
            let cfg = p.alloc_config(lib.size()).with_context(|| format!("chunk size {chunk_bytes}"))?;
            let t = Instant::now();
            let chunks = collide_files(&files, &p, &index);
            let plan = allocate_with(p.allocator, &chunks, &cfg);
            let wall_time = t.elapsed().as_secs_f64();
            let collided: u128 = chunks.iter().map(|c| c.collisions.count() as u128).sum();
            Ok(SweepPoint {
                chunk_bytes,
                avg_collided_per_chunk: Ratio::new(collided, chunks.len() as u128),
                report: report_from_plan(&plan),
                wall_time,
            })
        })
        .collect()
}

pub fn write_csv(points: &[SweepPoint], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(CsvRow {
            chunk_bytes: p.chunk_bytes,
            avg_collided_primers_per_chunk: &p.avg_collided_per_chunk.value,
            avg_tube_capacity: &p.report.avg_capacity_bytes.value,
            avg_sequencings_per_file: &p.report.retrieval.avg_sequencings.value,
            wall_time: format!("{:.3}", p.wall_time),
        })?;
    }
    w.flush()?;
    Ok(())
}
