//! Frozen code tables.
//!
//! The Blawat and Grass tables are produced by generator functions and also
//! checked in under `tables/`. [`verify_tables`] confirms that the embedded
//! files hash to the recorded digests and still match the generators.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::blawat;
use super::grass::grass_triplets;

pub const BLAWAT_FILE: &str = "blawat.tsv";
pub const GRASS_FILE: &str = "grass.tsv";

pub const BLAWAT_GOLDEN: &str = include_str!("../../tables/blawat.tsv");
pub const GRASS_GOLDEN: &str = include_str!("../../tables/grass.tsv");

pub const BLAWAT_SHA256: &str = "41eff3d335b6decac12ef64e2d9b8e505f8a0ba257acf553b20f73e63a110c42";
pub const GRASS_SHA256: &str = "7e98d456389ed87df321643793440aabf4abeb7bb466dfd7d201596a9105d543";

#[derive(Debug, Error)]
pub enum TableError {
    #[error("table {name} hash mismatch: expected {expected}, found {found}")]
    HashMismatch { name: &'static str, expected: &'static str, found: String },
    #[error("table {name} differs from its generator")]
    GeneratorMismatch { name: &'static str },
    #[error("reading table {name}: {source}")]
    Io { name: &'static str, source: std::io::Error },
}

/// One line per byte: `<hex>\t<five bases>`, base-3 offset zero form.
pub fn blawat_table_text() -> String {
    let mut s = String::with_capacity(256 * 9);
    for byte in 0..=255u8 {
        let b: String = blawat::block(byte, 0).iter().map(|b| b.to_char()).collect();
        let _ = writeln!(s, "{byte:02x}\t{b}");
    }
    s
}

/// One line per GF(47) digit: `<digit>\t<triplet>`.
pub fn grass_table_text() -> String {
    let mut s = String::with_capacity(47 * 7);
    for (d, t) in grass_triplets().iter().enumerate() {
        let b: String = t.iter().map(|b| b.to_char()).collect();
        let _ = writeln!(s, "{d}\t{b}");
    }
    s
}

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn check(name: &'static str, text: &str, expected: &'static str, generated: &str) -> Result<(), TableError> {
    let found = sha256_hex(text.as_bytes());
    if found != expected {
        return Err(TableError::HashMismatch { name, expected, found });
    }
    if text != generated {
        return Err(TableError::GeneratorMismatch { name });
    }
    Ok(())
}

/// Checks the embedded golden tables.
pub fn verify_tables() -> Result<(), TableError> {
    check(BLAWAT_FILE, BLAWAT_GOLDEN, BLAWAT_SHA256, &blawat_table_text())?;
    check(GRASS_FILE, GRASS_GOLDEN, GRASS_SHA256, &grass_table_text())
}

/// Checks table files found in `dir` against the recorded digests.
pub fn verify_table_dir(dir: &Path) -> Result<(), TableError> {
    for (name, expected, generated) in [
        (BLAWAT_FILE, BLAWAT_SHA256, blawat_table_text()),
        (GRASS_FILE, GRASS_SHA256, grass_table_text()),
    ] {
        let text = std::fs::read_to_string(dir.join(name)).map_err(|source| TableError::Io { name, source })?;
        check(name, &text, expected, &generated)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_tables_verify() {
        verify_tables().unwrap();
    }

    #[test]
    fn line_counts() {
        assert_eq!(BLAWAT_GOLDEN.lines().count(), 256);
        assert_eq!(GRASS_GOLDEN.lines().count(), 47);
        assert_eq!(BLAWAT_GOLDEN.lines().next(), Some("00\tAACAA"));
        assert_eq!(GRASS_GOLDEN.lines().last(), Some("46\tTTC"));
    }

    #[test]
    fn table_dir_verifies() {
        verify_table_dir(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tables")).unwrap();
    }

    #[test]
    fn tampered_table_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join(BLAWAT_FILE), BLAWAT_GOLDEN.replace("AACAA", "AACAC")).unwrap();
        std::fs::write(dir.path().join(GRASS_FILE), GRASS_GOLDEN).unwrap();
        assert!(matches!(verify_table_dir(dir.path()), Err(TableError::HashMismatch { .. })));
    }
}
