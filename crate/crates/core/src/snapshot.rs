//! Binary snapshot files.
//!
//! Layout: the magic bytes `KHM1`, then little-endian `u32 n`, `f64 nu`,
//! `f64 t`, then the `3 n³` physical values component by component.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::PhysicalField;
use crate::grid::GridSpec;

pub const MAGIC: &[u8; 4] = b"KHM1";

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub nu: f64,
    pub t: f64,
    pub field: PhysicalField,
}

pub fn write_to<W: Write>(w: &mut W, field: &PhysicalField, nu: f64, t: f64) -> Result<()> {
    let n = u32::try_from(field.grid().n)
        .map_err(|_| Error::InvalidInput("grid too large for snapshot".into()))?;
    let mut buf = Vec::with_capacity(24 + 8 * field.values().len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&n.to_le_bytes());
    buf.extend_from_slice(&nu.to_le_bytes());
    buf.extend_from_slice(&t.to_le_bytes());
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Reads a snapshot; the dealiasing fraction is not stored and defaults to 2/3.
pub fn read_from<R: Read>(r: &mut R) -> Result<Snapshot> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 24 || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing KHM1 header".into()));
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let nu = f64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let t = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let grid = GridSpec::new(n).map_err(|e| Error::Format(e.to_string()))?;
    let body = &bytes[24..];
    if body.len() != 8 * 3 * grid.len() {
        return Err(Error::Format(format!(
            "expected {} payload bytes for n = {n}, found {}",
            8 * 3 * grid.len(),
            body.len()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Snapshot {
        nu,
        t,
        field: PhysicalField::from_values(grid, values)?,
    })
}

pub fn write_file(path: impl AsRef<Path>, field: &PhysicalField, nu: f64, t: f64) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_to(&mut f, field, nu, t)?;
    f.flush()?;
    Ok(())
}

pub fn read_file(path: impl AsRef<Path>) -> Result<Snapshot> {
    let mut f = std::fs::File::open(path)?;
    read_from(&mut f)
}
