//! Argument parsing and the four subcommands.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tubealloc::codec::tables::verify_tables;
use tubealloc::primerlib::{generate_library, library_to_string, load_library, DEFAULT_LIBRARY_SIZE, DEFAULT_PRIMER_LEN};
use tubealloc::alloc::{plan_from_json, plan_to_json};
use tubealloc::{Allocator, CollisionParams, EncodingScheme};

use crate::pipeline::{run, RunParams};
use crate::report::{parse_report, render_text, report_from_plan, report_to_json};
use crate::sweep::{sweep, write_csv, DEFAULT_SWEEP_SIZES};
use crate::workload::{FileSizeMix, PlantedSpec, Workload};

#[derive(Debug, Parser)]
#[command(name = "tubealloc", version, about = "Collision-aware allocation of data chunks to DNA tubes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded primer library.
    GenPrimers(GenPrimersArgs),
    /// Encode a workload, detect collisions, allocate and report.
    Run(RunArgs),
    /// Repeat a run over several chunk sizes and emit CSV.
    Sweep(SweepArgs),
    /// Summarize a plan file.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenPrimersArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_LIBRARY_SIZE as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub size: u64,
    #[arg(long, default_value_t = DEFAULT_PRIMER_LEN as u64, value_parser = clap::value_parser!(u64).range(4..=64))]
    pub primer_len: u64,
    /// Output file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Rotation,
    Blawat,
    Grass,
    Cac,
}

impl From<SchemeArg> for EncodingScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Rotation => EncodingScheme::Rotation,
            SchemeArg::Blawat => EncodingScheme::Blawat,
            SchemeArg::Grass => EncodingScheme::Grass,
            SchemeArg::Cac => EncodingScheme::CacLite,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AllocatorArg {
    Aware,
    Sequential,
    Upgma,
}

impl From<AllocatorArg> for Allocator {
    fn from(a: AllocatorArg) -> Self {
        match a {
            AllocatorArg::Aware => Allocator::Aware,
            AllocatorArg::Sequential => Allocator::Sequential,
            AllocatorArg::Upgma => Allocator::Upgma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WorkloadArg {
    Random,
    Planted,
}

/// Flags shared by `run` and `sweep`.
#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub primer_lib: PathBuf,
    /// Workload seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SchemeArg::Rotation)]
    pub scheme: SchemeArg,
    #[arg(long, value_enum, default_value_t = AllocatorArg::Aware)]
    pub allocator: AllocatorArg,
    #[arg(long, default_value_t = tubealloc::alloc::DEFAULT_CHUNK_BYTES, value_parser = clap::value_parser!(u64).range(1..=u32::MAX as u64))]
    pub chunk_bytes: u64,
    #[arg(long, default_value_t = tubealloc::capacity::DEFAULT_PAYLOAD_LEN, value_parser = clap::value_parser!(u64).range(1..))]
    pub payload_len: u64,
    #[arg(long, default_value_t = crate::DESK_PARALLEL_FACTOR, value_parser = clap::value_parser!(u64).range(1..))]
    pub parallel_factor: u64,
    #[arg(long, default_value_t = tubealloc::alloc::DEFAULT_K_LIMIT as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub k_limit: u64,
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..=64))]
    pub window: u64,
    #[arg(long, default_value_t = 2)]
    pub max_edits: u64,
    /// Also match primer reverse complements.
    #[arg(long)]
    pub reverse_complement: bool,
    #[arg(long, default_value_t = crate::DESK_TOTAL_BYTES, value_parser = clap::value_parser!(u64).range(1..))]
    pub total_bytes: u64,
    #[arg(long, default_value_t = 0.4)]
    pub small_fraction: f64,
    #[arg(long, default_value_t = 256 * 1024)]
    pub small_max: u64,
    #[arg(long, default_value_t = 4 * 1024 * 1024)]
    pub large_max: u64,
}

impl PipelineArgs {
    pub fn params(&self) -> Result<RunParams> {
        let collision = CollisionParams {
            window_len: self.window as usize,
            max_edits: self.max_edits as usize,
            reverse_complement: self.reverse_complement,
        };
        collision.validate()?;
        Ok(RunParams {
            scheme: self.scheme.into(),
            allocator: self.allocator.into(),
            chunk_bytes: self.chunk_bytes,
            payload_len: self.payload_len,
            parallel_factor: self.parallel_factor,
            k_limit: self.k_limit as usize,
            collision,
        })
    }

    pub fn mix(&self) -> Result<FileSizeMix> {
        let mix = FileSizeMix { small_fraction: self.small_fraction, small_max: self.small_max, large_max: self.large_max };
        mix.validate().map_err(anyhow::Error::msg)?;
        Ok(mix)
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long, value_enum, default_value_t = WorkloadArg::Random)]
    pub workload: WorkloadArg,
    #[arg(long, default_value_t = 5)]
    pub groups: usize,
    #[arg(long, default_value_t = 40)]
    pub primers_per_group: usize,
    #[arg(long, default_value_t = 400)]
    pub chunks_per_group: usize,
    #[arg(long, default_value_t = 10)]
    pub primers_per_chunk: usize,
    /// Directory for plan.json, report.json and timings.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the report as JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Chunk sizes in bytes, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SWEEP_SIZES)]
    pub sizes: Vec<u64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub plan: PathBuf,
    #[arg(long)]
    pub json: bool,
    /// A stored report that must match the one recomputed from the plan.
    #[arg(long)]
    pub verify: Option<PathBuf>,
}

/// Writes `data` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, data: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(data)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn gen_primers(args: &GenPrimersArgs) -> Result<()> {
    let lib = generate_library(args.seed, args.size as usize, args.primer_len as usize)?;
    write_atomic(&args.out, library_to_string(&lib).as_bytes())
}

pub fn cmd_run(args: &RunArgs, stdout: &mut impl Write) -> Result<()> {
    let p = &args.pipeline;
    let params = p.params()?;
    let lib = load_library(&p.primer_lib).with_context(|| format!("loading {}", p.primer_lib.display()))?;
    let workload = match args.workload {
        WorkloadArg::Random => Workload { file_size_distribution: p.mix()?, ..Workload::random(p.seed, p.total_bytes) },
        WorkloadArg::Planted => {
            let spec = PlantedSpec {
                groups: args.groups,
                primers_per_group: args.primers_per_group,
                chunks_per_group: args.chunks_per_group,
                primers_per_chunk: args.primers_per_chunk,
            };
            Workload::planted(p.seed, spec, params.chunk_bytes)
        }
    };
    let out = run(&lib, &workload, &params)?;
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_atomic(&dir.join("plan.json"), plan_to_json(&out.plan).as_bytes())?;
        write_atomic(&dir.join("report.json"), report_to_json(&out.report).as_bytes())?;
        let mut timings = serde_json::to_string_pretty(&out.timings)?;
        timings.push('\n');
        write_atomic(&dir.join("timings.json"), timings.as_bytes())?;
    }
    if args.json {
        stdout.write_all(report_to_json(&out.report).as_bytes())?;
    } else {
        stdout.write_all(render_text(&out.report).as_bytes())?;
        for (stage, secs) in &out.timings.stages {
            writeln!(stdout, "time {stage:<15} {secs:.3} s")?;
        }
    }
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs, stdout: &mut impl Write) -> Result<()> {
    let p = &args.pipeline;
    let params = p.params()?;
    let lib = load_library(&p.primer_lib).with_context(|| format!("loading {}", p.primer_lib.display()))?;
    let points = sweep(&lib, p.seed, p.total_bytes, &p.mix()?, &params, &args.sizes)?;
    let mut buf = Vec::new();
    write_csv(&points, &mut buf)?;
    match &args.out {
        Some(path) => write_atomic(path, &buf),
        None => Ok(stdout.write_all(&buf)?),
    }
}

pub fn cmd_report(args: &ReportArgs, stdout: &mut impl Write) -> Result<()> {
    let text = fs::read_to_string(&args.plan).with_context(|| format!("reading {}", args.plan.display()))?;
    let plan = plan_from_json(&text).with_context(|| format!("parsing {}", args.plan.display()))?;
    let report = report_from_plan(&plan);
    if let Some(stored) = &args.verify {
        let text = fs::read_to_string(stored).with_context(|| format!("reading {}", stored.display()))?;
        let stored_report = parse_report(&text).with_context(|| format!("parsing {}", stored.display()))?;
        anyhow::ensure!(stored_report == report, "{} does not match the plan", stored.display());
    }
    if args.json {
        stdout.write_all(report_to_json(&report).as_bytes())?;
    } else {
        stdout.write_all(render_text(&report).as_bytes())?;
    }
    Ok(())
}

pub fn execute(cli: &Cli, stdout: &mut impl Write) -> Result<()> {
    verify_tables().context("built-in codec tables failed verification")?;
    match &cli.command {
        Command::GenPrimers(a) => gen_primers(a),
        Command::Run(a) => cmd_run(a, stdout),
        Command::Sweep(a) => cmd_sweep(a, stdout),
        Command::Report(a) => cmd_report(a, stdout),
    }
}

/// Parses `args`, runs the command and maps the outcome to an exit code:
/// 0 on success, 1 on a runtime failure, 2 on a usage error.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli, &mut std::io::stdout().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
