//! Binary collision-set dump.
//!
//! Layout (all integers little-endian): magic `CSET`, `u32` version,
//! `u32` library size, `u32` chunk count, then per chunk `u32` chunk id,
//! `u32` file id, `u32` byte length and `ceil(library_size / 8)` bytes of
//! bit vector with bit `i` at byte `i / 8`, position `i % 8`.

use std::io::{Read, Write};

use super::{CollisionError, CollisionSet};
use crate::alloc::Chunk;

pub const CSET_MAGIC: [u8; 4] = *b"CSET";
pub const CSET_VERSION: u32 = 1;

pub fn write_cset(mut w: impl Write, library_size: usize, chunks: &[Chunk]) -> Result<(), CollisionError> {
    let lib = u32::try_from(library_size).map_err(|_| CollisionError::Format("library too large".into()))?;
    let count = u32::try_from(chunks.len()).map_err(|_| CollisionError::Format("too many chunks".into()))?;
    w.write_all(&CSET_MAGIC)?;
    w.write_all(&CSET_VERSION.to_le_bytes())?;
    w.write_all(&lib.to_le_bytes())?;
    w.write_all(&count.to_le_bytes())?;
    for c in chunks {
        if c.collisions.width() != library_size {
            return Err(CollisionError::WidthMismatch { left: library_size, right: c.collisions.width() });
        }
        w.write_all(&c.chunk_id.to_le_bytes())?;
        w.write_all(&c.file_id.to_le_bytes())?;
        w.write_all(&c.byte_len.to_le_bytes())?;
        w.write_all(&c.collisions.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32, CollisionError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Returns the library size and the chunks in file order.
pub fn read_cset(mut r: impl Read) -> Result<(usize, Vec<Chunk>), CollisionError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != CSET_MAGIC {
        return Err(CollisionError::Format("bad magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != CSET_VERSION {
        return Err(CollisionError::Format(format!("unsupported version {version}")));
    }
    let lib = read_u32(&mut r)? as usize;
    let count = read_u32(&mut r)? as usize;
    let mut chunks = Vec::with_capacity(count.min(1 << 20));
    let mut bits = vec![0u8; lib.div_ceil(8)];
    for _ in 0..count {
        let chunk_id = read_u32(&mut r)?;
        let file_id = read_u32(&mut r)?;
        let byte_len = read_u32(&mut r)?;
        r.read_exact(&mut bits)?;
        let collisions = CollisionSet::from_le_bytes(lib, &bits)?;
        chunks.push(Chunk { chunk_id, file_id, byte_len, collisions });
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(CollisionError::Format("trailing bytes after last chunk".into()));
    }
    Ok((lib, chunks))
}
