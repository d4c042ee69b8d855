//! Pipeline, workload generation, reports and sweeps behind the `tubealloc`
//! binary.

pub mod commands;
pub mod pipeline;
pub mod report;
pub mod sweep;
pub mod workload;

/// Strands per primer pair used by default at desk scale. Chosen so that the
/// default 64 MB random workload on a 2,800-primer library fills about five
/// tubes.
pub const DESK_PARALLEL_FACTOR: u64 = 3_200;

/// Desk-scale workload size for `run`.
pub const DESK_TOTAL_BYTES: u64 = 64 * 1024 * 1024;
