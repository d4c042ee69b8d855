//! Seeded primer library generation, validation and persistence.
//!
//! Primers are drawn with ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`).
//! Each candidate consumes `ceil(len / 32)` calls to `next_u64`; bases are read
//! two bits at a time from the low end (00 = A, 01 = C, 10 = G, 11 = T).
//! Candidates failing the design rules or repeating an earlier primer are
//! discarded.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::codec::{max_run, Base, BaseSeq};

pub const DEFAULT_LIBRARY_SIZE: usize = 28_000;
pub const DEFAULT_PRIMER_LEN: usize = 20;
pub const MAX_DRAWS: u64 = 1_000_000_000;
pub const MAX_HOMOPOLYMER: usize = 3;

const HEADER_PREFIX: &str = "#primerlib v1";

#[derive(Debug, Error)]
pub enum PrimerError {
    #[error("invalid library parameters: {0}")]
    InvalidParams(String),
    #[error("gave up after {draws} draws with {accepted} primers accepted")]
    GenerationExhausted { draws: u64, accepted: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Primer {
    pub id: u32,
    pub bases: BaseSeq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimerLibrary {
    pub primers: Vec<Primer>,
    pub seed: u64,
    pub primer_len: usize,
}

impl PrimerLibrary {
    pub fn size(&self) -> usize {
        self.primers.len()
    }

    pub fn get(&self, id: u32) -> Option<&Primer> {
        self.primers.get(id as usize)
    }

    /// Rebuilds a library from explicit sequences (ids assigned in order).
    pub fn from_sequences(seqs: Vec<BaseSeq>, seed: u64) -> PrimerLibrary {
        let primer_len = seqs.first().map_or(0, |s| s.len());
        let primers = seqs
            .into_iter()
            .enumerate()
            .map(|(i, bases)| Primer { id: i as u32, bases })
            .collect();
        PrimerLibrary { primers, seed, primer_len }
    }
}

/// GC fraction within [0.45, 0.55] and no homopolymer longer than 3.
pub fn validate_primer(p: &Primer) -> bool {
    validate_bases(&p.bases)
}

pub fn validate_bases(bases: &[Base]) -> bool {
    let n = bases.len();
    if n == 0 {
        return false;
    }
    let gc = bases.iter().filter(|b| b.is_gc()).count();
    100 * gc >= 45 * n && 100 * gc <= 55 * n && max_run(bases) <= MAX_HOMOPOLYMER
}

pub fn generate_library(seed: u64, size: usize, primer_len: usize) -> Result<PrimerLibrary, PrimerError> {
    generate_with_budget(seed, size, primer_len, MAX_DRAWS)
}

pub(crate) fn generate_with_budget(
    seed: u64,
    size: usize,
    primer_len: usize,
    max_draws: u64,
) -> Result<PrimerLibrary, PrimerError> {
    if size < 2 {
        return Err(PrimerError::InvalidParams(format!("size {size} < 2")));
    }
    if primer_len < 12 {
        return Err(PrimerError::InvalidParams(format!("primer_len {primer_len} < 12")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<Vec<Base>> = HashSet::with_capacity(size);
    let mut primers = Vec::with_capacity(size);
    let mut buf = Vec::with_capacity(primer_len);
    let mut draws = 0u64;
    while primers.len() < size {
        if draws >= max_draws {
            return Err(PrimerError::GenerationExhausted { draws, accepted: primers.len() });
        }
        draws += 1;
        buf.clear();
        while buf.len() < primer_len {
            let mut word = rng.next_u64();
            for _ in 0..32.min(primer_len - buf.len()) {
                buf.push(Base::from_code(word as u8));
                word >>= 2;
            }
        }
        if validate_bases(&buf) && seen.insert(buf.clone()) {
            primers.push(Primer { id: primers.len() as u32, bases: BaseSeq::from_bases(buf.clone()) });
        }
    }
    Ok(PrimerLibrary { primers, seed, primer_len })
}

pub fn library_to_string(lib: &PrimerLibrary) -> String {
    let mut s = String::with_capacity(lib.size() * (lib.primer_len + 8) + 64);
    let _ = writeln!(s, "{HEADER_PREFIX} seed={} size={} len={}", lib.seed, lib.size(), lib.primer_len);
    for p in &lib.primers {
        let _ = writeln!(s, "{}\t{}", p.id, p.bases);
    }
    s
}

pub fn save_library(lib: &PrimerLibrary, path: &Path) -> Result<(), PrimerError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(library_to_string(lib).as_bytes())?;
    f.sync_all()?;
    Ok(())
}

pub fn load_library(path: &Path) -> Result<PrimerLibrary, PrimerError> {
    parse_library(BufReader::new(std::fs::File::open(path)?))
}

fn header_field<'a>(fields: &mut impl Iterator<Item = &'a str>, key: &str) -> Result<&'a str, PrimerError> {
    let tok = fields.next().unwrap_or("");
    tok.strip_prefix(key)
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| PrimerError::Format { line: 1, msg: format!("expected {key}=<value>, found '{tok}'") })
}

pub fn parse_library(reader: impl BufRead) -> Result<PrimerLibrary, PrimerError> {
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.ok_or(PrimerError::Format { line: 1, msg: "empty file".into() })?;
    let rest = header
        .strip_prefix(HEADER_PREFIX)
        .ok_or_else(|| PrimerError::Format { line: 1, msg: "missing '#primerlib v1' header".into() })?;
    let mut fields = rest.split_whitespace();
    let bad = |msg: &str| PrimerError::Format { line: 1, msg: msg.to_string() };
    let seed: u64 = header_field(&mut fields, "seed")?.parse().map_err(|_| bad("bad seed"))?;
    let size: usize = header_field(&mut fields, "size")?.parse().map_err(|_| bad("bad size"))?;
    let primer_len: usize = header_field(&mut fields, "len")?.parse().map_err(|_| bad("bad len"))?;
    if fields.next().is_some() {
        return Err(bad("trailing header fields"));
    }

    let mut primers = Vec::with_capacity(size);
    let mut seen = HashSet::with_capacity(size);
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line?;
        let err = |msg: String| PrimerError::Format { line: lineno, msg };
        let (id, seq) = line.split_once('\t').ok_or_else(|| err("expected '<id>\\t<bases>'".into()))?;
        let id: u32 = id.parse().map_err(|_| err(format!("bad id '{id}'")))?;
        if id as usize != primers.len() {
            return Err(err(format!("expected id {}, found {id}", primers.len())));
        }
        let bases: BaseSeq = seq.parse().map_err(|e| err(format!("{e}")))?;
        if bases.len() != primer_len {
            return Err(err(format!("primer length {} != {primer_len}", bases.len())));
        }
        if !validate_bases(&bases) {
            return Err(err("primer violates design rules".into()));
        }
        if !seen.insert(bases.clone()) {
            return Err(err("duplicate primer".into()));
        }
        primers.push(Primer { id, bases });
    }
    if primers.len() != size {
        return Err(PrimerError::Format {
            line: primers.len() + 2,
            msg: format!("header size {size} but {} records", primers.len()),
        });
    }
    Ok(PrimerLibrary { primers, seed, primer_len })
}
