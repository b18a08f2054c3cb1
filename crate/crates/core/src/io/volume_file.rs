//! `UEV1` volume files.
//!
//! Layout (all little-endian):
//!
//! | offset | size | content                       |
//! |--------|------|-------------------------------|
//! | 0      | 4    | magic `UEV1`                  |
//! | 4      | 12   | dims, 3 x u32                 |
//! | 16     | 12   | spacing, 3 x f32 (mm)         |
//! | 28     | 12   | origin, 3 x f32 (mm)          |
//! | 40     | 4·n  | voxels, f32, x-fastest        |
//!
//! In-memory values are `f64`; writing rounds them to `f32`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{Grid, Volume3D};

pub const MAGIC: &[u8; 4] = b"UEV1";
pub const HEADER_LEN: usize = 40;

pub fn encode_volume(vol: &Volume3D) -> Vec<u8> {
    let g = vol.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * g.len());
    out.extend_from_slice(MAGIC);
    for d in g.dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for s in g.spacing {
        out.extend_from_slice(&(s as f32).to_le_bytes());
    }
    for o in g.origin {
        out.extend_from_slice(&(o as f32).to_le_bytes());
    }
    for &v in vol.voxels() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

fn f32_at(bytes: &[u8], offset: usize) -> f32 {
    f32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap())
}

pub fn decode_volume(bytes: &[u8]) -> Result<Volume3D> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(Error::Parse("not a UEV1 volume (bad magic or truncated header)".into()));
    }
    let dims = [0, 1, 2].map(|a| u32::from_le_bytes(bytes[4 + 4 * a..8 + 4 * a].try_into().unwrap()) as usize);
    let spacing = [0, 1, 2].map(|a| f32_at(bytes, 16 + 4 * a) as f64);
    let origin = [0, 1, 2].map(|a| f32_at(bytes, 28 + 4 * a) as f64);
    let grid = Grid::new(dims, spacing, origin).map_err(|e| Error::Parse(format!("UEV1 header: {e}")))?;
    let expected = grid
        .len()
        .checked_mul(4)
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::Parse("UEV1 dims overflow".into()))?;
    if bytes.len() != expected {
        return Err(Error::Parse(format!(
            "UEV1 length {} does not match dims {:?} (expected {expected})",
            bytes.len(),
            dims
        )));
    }
    let voxels = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Volume3D::new(grid, voxels).map_err(|e| Error::Parse(format!("UEV1 voxels: {e}")))
}

pub fn write_volume(path: impl AsRef<Path>, vol: &Volume3D) -> Result<()> {
    std::fs::write(path, encode_volume(vol))?;
    Ok(())
}

pub fn read_volume(path: impl AsRef<Path>) -> Result<Volume3D> {
    decode_volume(&crate::error::read_file(path.as_ref())?)
}
