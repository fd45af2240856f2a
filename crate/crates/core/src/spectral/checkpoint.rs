//! Binary field checkpoints.
//!
//! Layout (little endian): `b"MFLB"`, `u32` version, `u64` dim, `u64` M,
//! `f64` L — 32 bytes — then `M^dim` interleaved `(re, im)` `f64` pairs.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::{Field, Grid};
use crate::C64;

pub const MAGIC: &[u8; 4] = b"MFLB";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;

pub fn write_field<W: Write>(mut w: W, field: &Field) -> Result<()> {
    let g = field.grid();
    let mut buf = Vec::with_capacity(HEADER_LEN + 16 * g.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(g.dim() as u64).to_le_bytes());
    buf.extend_from_slice(&(g.points() as u64).to_le_bytes());
    buf.extend_from_slice(&g.length().to_le_bytes());
    for v in field.values() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_field<R: Read>(mut r: R) -> Result<Field> {
    let mut head = [0u8; HEADER_LEN];
    r.read_exact(&mut head)?;
    if &head[0..4] != MAGIC {
        return Err(Error::InvalidParameter("not an MFLB checkpoint".into()));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::InvalidParameter(format!(
            "unsupported checkpoint version {version}"
        )));
    }
    let dim = u64::from_le_bytes(head[8..16].try_into().unwrap()) as usize;
    let points = u64::from_le_bytes(head[16..24].try_into().unwrap()) as usize;
    let length = f64::from_le_bytes(head[24..32].try_into().unwrap());
    let grid = Grid::new(dim, points, length)?;
    let mut body = vec![0u8; 16 * grid.len()];
    r.read_exact(&mut body)?;
    let values = body
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    Field::new(grid, values)
}

/// Write atomically: a sibling temporary file is renamed into place.
pub fn save(path: &Path, field: &Field) -> Result<()> {
    let mut bytes = Vec::new();
    write_field(&mut bytes, field)?;
    crate::runner::output::write_atomic(path, &bytes)
}

pub fn load(path: &Path) -> Result<Field> {
    read_field(std::io::BufReader::new(std::fs::File::open(path)?))
}
