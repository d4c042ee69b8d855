//! Byte-to-DNA encoders, Reed-Solomon outer code and payload framing.

mod bases;
mod blawat;
mod cac;
mod frame;
mod grass;
mod rotation;
mod rs;
pub mod tables;

pub use bases::{Base, BaseSeq};
pub use blawat::{decode_blawat, encode_blawat};
pub use cac::{decode_cac_lite, encode_cac_lite, CAC_CONTEXT_WINDOW};
pub use frame::{frame_payloads, PayloadFrame, PAD_CYCLE};
pub use grass::{decode_grass, encode_grass};
pub use rotation::{decode_rotation, encode_rotation};
pub use rs::{encoded_len as rs_encoded_len, rs_decode, rs_encode, RS_K, RS_N, RS_PARITY};

pub(crate) use bases::max_run;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("invalid base {found:?} at position {position}")]
    InvalidBase { position: usize, found: char },
    #[error("malformed sequence: {0}")]
    MalformedSequence(String),
    #[error("code length {len} does not match codeword framing")]
    MalformedLength { len: usize },
    #[error("codeword {0} has more errors than can be corrected")]
    UncorrectableCodeword(usize),
}

pub(crate) fn malformed(msg: impl Into<String>) -> CodecError {
    CodecError::MalformedSequence(msg.into())
}

/// The four supported byte-to-base mappings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncodingScheme {
    Rotation,
    Blawat,
    Grass,
    #[serde(rename = "cac")]
    CacLite,
}

impl EncodingScheme {
    pub const ALL: [EncodingScheme; 4] = [
        EncodingScheme::Rotation,
        EncodingScheme::Blawat,
        EncodingScheme::Grass,
        EncodingScheme::CacLite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EncodingScheme::Rotation => "rotation",
            EncodingScheme::Blawat => "blawat",
            EncodingScheme::Grass => "grass",
            EncodingScheme::CacLite => "cac",
        }
    }

    pub fn block_in_bits(self) -> u32 {
        match self {
            EncodingScheme::Rotation => 19,
            EncodingScheme::Blawat => 8,
            EncodingScheme::Grass => 16,
            EncodingScheme::CacLite => 3,
        }
    }

    pub fn block_out_bases(self) -> u32 {
        match self {
            EncodingScheme::Rotation => 12,
            EncodingScheme::Blawat => 5,
            EncodingScheme::Grass => 9,
            EncodingScheme::CacLite => 3,
        }
    }

    /// Density as a `(bits, bases)` pair in lowest terms.
    pub fn density(self) -> (u32, u32) {
        let (n, d) = (self.block_in_bits(), self.block_out_bases());
        let g = gcd(n, d);
        (n / g, d / g)
    }

    pub fn encode(self, data: &[u8]) -> BaseSeq {
        match self {
            EncodingScheme::Rotation => encode_rotation(data),
            EncodingScheme::Blawat => encode_blawat(data),
            EncodingScheme::Grass => encode_grass(data),
            EncodingScheme::CacLite => encode_cac_lite(data, CAC_CONTEXT_WINDOW),
        }
    }

    pub fn decode(self, seq: &BaseSeq) -> Result<Vec<u8>, CodecError> {
        match self {
            EncodingScheme::Rotation => decode_rotation(seq),
            EncodingScheme::Blawat => decode_blawat(seq),
            EncodingScheme::Grass => decode_grass(seq),
            EncodingScheme::CacLite => decode_cac_lite(seq),
        }
    }
}

impl std::fmt::Display for EncodingScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EncodingScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rotation" => Ok(EncodingScheme::Rotation),
            "blawat" => Ok(EncodingScheme::Blawat),
            "grass" => Ok(EncodingScheme::Grass),
            "cac" | "cac-lite" | "caclite" => Ok(EncodingScheme::CacLite),
            other => Err(format!("unknown scheme '{other}'")),
        }
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
