use serde::{Deserialize, Serialize};

use super::{Base, BaseSeq};

/// Filler appended to the last frame of a chunk.
pub const PAD_CYCLE: [Base; 4] = [Base::A, Base::C, Base::G, Base::T];

/// One fixed-length payload strand of a chunk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayloadFrame {
    #[serde(with = "seq_string")]
    pub payload: BaseSeq,
    pub chunk_id: u32,
    pub strand_index: u32,
}

/// Cuts `seq` into frames of exactly `payload_len` bases, padding the last one.
pub fn frame_payloads(seq: &BaseSeq, chunk_id: u32, payload_len: usize) -> Vec<PayloadFrame> {
    assert!(payload_len > 0, "payload_len must be positive");
    seq.chunks(payload_len)
        .enumerate()
        .map(|(i, part)| {
            let mut payload = BaseSeq::with_capacity(payload_len);
            payload.extend_from_slice(part);
            for k in 0..payload_len - part.len() {
                payload.push(PAD_CYCLE[k % 4]);
            }
            PayloadFrame { payload, chunk_id, strand_index: i as u32 }
        })
        .collect()
}

mod seq_string {
    use super::BaseSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seq: &BaseSeq, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(seq)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BaseSeq, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
