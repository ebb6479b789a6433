//! Raw-sample dump: 16-byte header (`EPRMC001`, `u32` mode count, `u32` zero), then
//! row-major little-endian `f64` quadratures, `2n` per row.

use std::io::{Read, Write};

use super::sampling::SampleBatch;
use crate::error::{invalid, Result};

pub const DUMP_MAGIC: &[u8; 8] = b"EPRMC001";

pub fn write_samples<W: Write>(mut out: W, batch: &SampleBatch) -> Result<()> {
    let modes = u32::try_from(batch.n_modes()).map_err(|_| invalid("too many modes"))?;
    out.write_all(DUMP_MAGIC)?;
    out.write_all(&modes.to_le_bytes())?;
    out.write_all(&0u32.to_le_bytes())?;
    let mut bytes = Vec::with_capacity(batch.samples().len() * 8);
    for v in batch.samples() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&bytes)?;
    Ok(())
}

/// Reads a dump back; the seed is not stored and is supplied by the caller.
pub fn read_samples<R: Read>(mut input: R, seed: u64) -> Result<SampleBatch> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header)?;
    if &header[..8] != DUMP_MAGIC {
        return Err(invalid("not an EPRMC001 sample dump"));
    }
    let modes = u32::from_le_bytes(header[8..12].try_into().expect("4 bytes")) as usize;
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    if body.len() % 8 != 0 {
        return Err(invalid("dump body is not a whole number of f64 values"));
    }
    let samples = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    SampleBatch::from_raw(modes, samples, seed)
}
