//! `report v1`: summary numbers derived from a plan and nothing else.

use std::fmt::Write as _;

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use tubealloc::alloc::retrieval_cost;
use tubealloc::{pair_capacity_bytes, AllocationPlan, Allocator};

pub const REPORT_SCHEMA: &str = "report v1";
/// Files sampled for the retrieval figures.
pub const RETRIEVAL_SAMPLE: usize = 1000;

/// Exact fraction in lowest terms plus a fixed 6-decimal rendering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ratio {
    pub num: u128,
    pub den: u128,
    pub value: String,
}

impl Ratio {
    pub fn new(num: u128, den: u128) -> Ratio {
        if den == 0 {
            return Ratio { num: 0, den: 1, value: render(0, 1) };
        }
        let g = gcd(num, den).max(1);
        let (num, den) = (num / g, den / g);
        Ratio { num, den, value: render(num, den) }
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `num/den` to 6 decimals, rounding half up.
fn render(num: u128, den: u128) -> String {
    let scaled = (num * 1_000_000 * 2 + den) / (2 * den);
    format!("{}.{:06}", scaled / 1_000_000, scaled % 1_000_000)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TubeRow {
    pub tube_id: u32,
    pub chunks: usize,
    pub files: usize,
    pub total_bytes: u64,
    pub collided_primers: usize,
    pub usable_primers: usize,
    pub capacity_bytes: u64,
    pub pairs_used: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrievalSummary {
    pub sampled_files: usize,
    pub total_sequencings: u64,
    pub avg_sequencings: Ratio,
    pub max_sequencings: usize,
    pub k_limit: usize,
    /// Files (from the whole plan, not just the sample) needing more than
    /// `k_limit` sequencings.
    pub files_over_k_limit: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub schema: String,
    pub allocator: Allocator,
    pub library_size: usize,
    pub pair_capacity_bytes: u64,
    pub tube_count: usize,
    pub chunk_count: usize,
    pub file_count: usize,
    pub quarantined: usize,
    pub total_bytes: u64,
    pub total_capacity_bytes: u64,
    pub objective: u64,
    pub avg_usable_primers: Ratio,
    pub avg_collided_primers: Ratio,
    pub avg_capacity_bytes: Ratio,
    pub retrieval: RetrievalSummary,
    pub tubes: Vec<TubeRow>,
}

/// Up to `k` of `ids`, evenly spaced; all of them when there are at most `k`.
pub fn sample_evenly(ids: &[u32], k: usize) -> Vec<u32> {
    if ids.len() <= k {
        return ids.to_vec();
    }
    (0..k).map(|i| ids[i * ids.len() / k]).collect()
}

pub fn report_from_plan(plan: &AllocationPlan) -> RunReport {
    let tubes: Vec<TubeRow> = plan
        .tubes
        .iter()
        .map(|t| TubeRow {
            tube_id: t.tube_id,
            chunks: t.chunks.len(),
            files: t.pair_assignments.len(),
            total_bytes: t.total_bytes,
            collided_primers: t.collided_primers,
            usable_primers: t.usable_primers,
            capacity_bytes: t.capacity_bytes,
            pairs_used: t.pairs_used(),
        })
        .collect();
    let n = tubes.len() as u128;
    let files = plan.file_ids();
    let cost = |f: u32| retrieval_cost(plan, f).expect("file id taken from the plan");
    let sample = sample_evenly(&files, RETRIEVAL_SAMPLE);
    let costs: Vec<usize> = sample.iter().map(|&f| cost(f)).collect();
    let k = plan.config.k_seq_limit;
    let total_sequencings = costs.iter().map(|&c| c as u64).sum::<u64>();
    RunReport {
        schema: REPORT_SCHEMA.to_string(),
        allocator: plan.allocator,
        library_size: plan.library_size,
        pair_capacity_bytes: pair_capacity_bytes(&plan.config.params),
        tube_count: tubes.len(),
        chunk_count: plan.chunk_count(),
        file_count: files.len(),
        quarantined: plan.quarantined.len(),
        total_bytes: tubes.iter().map(|t| t.total_bytes).sum(),
        total_capacity_bytes: tubes.iter().map(|t| t.capacity_bytes).sum(),
        objective: plan.objective,
        avg_usable_primers: Ratio::new(tubes.iter().map(|t| t.usable_primers as u128).sum(), n),
        avg_collided_primers: Ratio::new(tubes.iter().map(|t| t.collided_primers as u128).sum(), n),
        avg_capacity_bytes: Ratio::new(tubes.iter().map(|t| t.capacity_bytes as u128).sum(), n),
        retrieval: RetrievalSummary {
            sampled_files: sample.len(),
            total_sequencings,
            avg_sequencings: Ratio::new(total_sequencings as u128, sample.len() as u128),
            max_sequencings: costs.iter().copied().max().unwrap_or(0),
            k_limit: k,
            files_over_k_limit: files.iter().copied().filter(|&f| cost(f) > k).collect(),
        },
        tubes,
    }
}

pub fn report_to_json(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Parses a report and checks every aggregate against its own tube table.
pub fn parse_report(text: &str) -> Result<RunReport> {
    let r: RunReport = serde_json::from_str(text).context("malformed report")?;
    validate_report(&r)?;
    Ok(r)
}

pub fn validate_report(r: &RunReport) -> Result<()> {
    if r.schema != REPORT_SCHEMA {
        bail!("unsupported report schema '{}'", r.schema);
    }
    ensure!(r.tube_count == r.tubes.len(), "tube_count {} but {} tube rows", r.tube_count, r.tubes.len());
    let n = r.tubes.len() as u128;
    for t in &r.tubes {
        ensure!(t.collided_primers + t.usable_primers == r.library_size, "tube {}: primer counts do not add up", t.tube_id);
        ensure!(t.total_bytes <= t.capacity_bytes, "tube {}: over capacity", t.tube_id);
        ensure!(
            t.capacity_bytes == (t.usable_primers / 2) as u64 * r.pair_capacity_bytes,
            "tube {}: capacity does not match its usable primers",
            t.tube_id
        );
    }
    ensure!(r.total_bytes == r.tubes.iter().map(|t| t.total_bytes).sum::<u64>(), "total_bytes mismatch");
    ensure!(r.total_capacity_bytes == r.tubes.iter().map(|t| t.capacity_bytes).sum::<u64>(), "total_capacity_bytes mismatch");
    ensure!(r.objective == r.tubes.iter().map(|t| t.collided_primers as u64).sum::<u64>(), "objective mismatch");
    let checks = [
        ("avg_usable_primers", &r.avg_usable_primers, r.tubes.iter().map(|t| t.usable_primers as u128).sum::<u128>(), n),
        ("avg_collided_primers", &r.avg_collided_primers, r.tubes.iter().map(|t| t.collided_primers as u128).sum(), n),
        ("avg_capacity_bytes", &r.avg_capacity_bytes, r.tubes.iter().map(|t| t.capacity_bytes as u128).sum(), n),
        (
            "avg_sequencings",
            &r.retrieval.avg_sequencings,
            r.retrieval.total_sequencings as u128,
            r.retrieval.sampled_files as u128,
        ),
    ];
    for (name, got, num, den) in checks {
        ensure!(*got == Ratio::new(num, den), "{name} does not match the recomputed value");
    }
    ensure!(r.retrieval.sampled_files <= RETRIEVAL_SAMPLE.min(r.file_count), "retrieval sample too large");
    Ok(())
}

pub fn render_text(r: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "allocator            {}", r.allocator);
    let _ = writeln!(s, "library size         {}", r.library_size);
    let _ = writeln!(s, "pair capacity        {} B", r.pair_capacity_bytes);
    let _ = writeln!(s, "tubes                {}", r.tube_count);
    let _ = writeln!(s, "chunks               {} ({} quarantined)", r.chunk_count, r.quarantined);
    let _ = writeln!(s, "files                {}", r.file_count);
    let _ = writeln!(s, "bytes stored         {} of {} capacity", r.total_bytes, r.total_capacity_bytes);
    let _ = writeln!(s, "objective            {}", r.objective);
    let _ = writeln!(s, "avg usable primers   {}", r.avg_usable_primers.value);
    let _ = writeln!(s, "avg collided primers {}", r.avg_collided_primers.value);
    let _ = writeln!(s, "avg tube capacity    {} B", r.avg_capacity_bytes.value);
    let _ = writeln!(
        s,
        "retrieval            avg {} / max {} sequencings over {} files",
        r.retrieval.avg_sequencings.value, r.retrieval.max_sequencings, r.retrieval.sampled_files
    );
    let _ = writeln!(s, "files over K={}       {}", r.retrieval.k_limit, r.retrieval.files_over_k_limit.len());
    if !r.tubes.is_empty() {
        let _ = writeln!(s, "\n{:>5} {:>7} {:>6} {:>9} {:>7} {:>14} {:>14} {:>6}", "tube", "chunks", "files", "collided", "usable", "bytes", "capacity", "pairs");
        for t in &r.tubes {
            let _ = writeln!(
                s,
                "{:>5} {:>7} {:>6} {:>9} {:>7} {:>14} {:>14} {:>6}",
                t.tube_id, t.chunks, t.files, t.collided_primers, t.usable_primers, t.total_bytes, t.capacity_bytes, t.pairs_used
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use tubealloc::{allocate, AllocConfig, CapacityParams, Chunk, CollisionSet};

    fn small_plan() -> AllocationPlan {
        let cfg = AllocConfig::new(CapacityParams::new(200, (19, 12), 2, 30).unwrap());
        let chunks: Vec<Chunk> = (0..12u32)
            .map(|i| Chunk {
                chunk_id: i,
                file_id: i / 2,
                byte_len: 40 + i * 3,
                collisions: CollisionSet::from_indices(30, [(i % 4) as usize * 3, 20 + (i % 3) as usize]),
            })
            .collect();
        allocate(&chunks, &cfg)
    }

    #[test]
    fn ratio_rendering() {
        assert_eq!(Ratio::new(2, 3).value, "0.666667");
        assert_eq!(Ratio::new(1, 8).value, "0.125000");
        assert_eq!(Ratio::new(10, 4), Ratio { num: 5, den: 2, value: "2.500000".into() });
        assert_eq!(Ratio::new(0, 0).value, "0.000000");
        assert_eq!(Ratio::new(1, 2_000_000).value, "0.000001");
    }

    #[test]
    fn sample_is_even_and_bounded() {
        let ids: Vec<u32> = (0..2500).collect();
        let s = sample_evenly(&ids, 1000);
        assert_eq!(s.len(), 1000);
        assert_eq!(s[0], 0);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(sample_evenly(&ids[..10], 1000).len(), 10);
    }

    #[test]
    fn empty_plan_reports_zeros() {
        let cfg = AllocConfig::new(CapacityParams::new(200, (19, 12), 2, 30).unwrap());
        let r = report_from_plan(&AllocationPlan::empty(Allocator::Aware, cfg));
        assert_eq!(r.tube_count, 0);
        assert_eq!(r.avg_usable_primers.value, "0.000000");
        assert_eq!(r.retrieval.avg_sequencings.value, "0.000000");
        parse_report(&report_to_json(&r)).unwrap();
    }

    #[test]
    fn json_round_trips_and_validates() {
        let r = report_from_plan(&small_plan());
        assert!(r.tube_count > 0);
        let back = parse_report(&report_to_json(&r)).unwrap();
        assert_eq!(back, r);
        assert!(report_to_json(&r).starts_with("{\n  \"schema\": \"report v1\""));
    }

    #[test]
    fn tampered_reports_are_rejected() {
        let r = report_from_plan(&small_plan());
        let mut bad = r.clone();
        bad.objective += 1;
        assert!(validate_report(&bad).is_err());
        let mut bad = r.clone();
        bad.avg_usable_primers.value = "1.0".into();
        assert!(validate_report(&bad).is_err());
        let text = report_to_json(&r).replacen("\"tubes\"", "\"extra\": 1,\n  \"tubes\"", 1);
        assert!(parse_report(&text).is_err());
        let text = report_to_json(&r).replace("report v1", "report v0");
        assert!(parse_report(&text).is_err());
    }

    #[test]
    fn text_mentions_every_tube() {
        let r = report_from_plan(&small_plan());
        let text = render_text(&r);
        assert_eq!(text.lines().filter(|l| l.trim_start().starts_with(char::is_numeric)).count(), r.tube_count);
    }
}
