//! Landmark CSV: header `id,unit,x,y,z,dx,dy,dz`, one landmark per row.
//!
//! `unit` is `mm` or `voxel`. Voxel rows are converted to millimetres on load
//! with the paired volume geometry: positions through `origin + spacing * v`,
//! displacements through `spacing * v`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{Grid, Landmark, LandmarkSet, Vec3};

pub const HEADER: &str = "id,unit,x,y,z,dx,dy,dz";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthUnit {
    Mm,
    Voxel,
}

impl LengthUnit {
    pub fn as_str(&self) -> &'static str {
        match self {
            LengthUnit::Mm => "mm",
            LengthUnit::Voxel => "voxel",
        }
    }
}

impl std::str::FromStr for LengthUnit {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mm" => Ok(LengthUnit::Mm),
            "voxel" => Ok(LengthUnit::Voxel),
            other => Err(Error::Parse(format!("unknown unit '{other}' (expected mm or voxel)"))),
        }
    }
}

/// Serializes in millimetres. Values use the shortest representation that
/// parses back to the same `f64`.
pub fn write_landmarks(set: &LandmarkSet) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for lm in set {
        push_row(&mut out, lm.id, LengthUnit::Mm, lm.x, lm.d);
    }
    out
}

/// Serializes in voxel units of `grid`.
pub fn write_landmarks_voxel(set: &LandmarkSet, grid: &Grid) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for lm in set {
        let x = grid.world_to_voxel(lm.x);
        let d = [0, 1, 2].map(|a| lm.d[a] / grid.spacing[a]);
        push_row(&mut out, lm.id, LengthUnit::Voxel, x, d);
    }
    out
}

fn push_row(out: &mut String, id: i64, unit: LengthUnit, x: Vec3, d: Vec3) {
    let _ = writeln!(
        out,
        "{id},{},{},{},{},{},{},{}",
        unit.as_str(),
        x[0],
        x[1],
        x[2],
        d[0],
        d[1],
        d[2]
    );
}

/// Parses landmark CSV text. `grid` is required only when a row uses voxel units.
pub fn parse_landmarks(text: &str, grid: Option<&Grid>) -> Result<LandmarkSet> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        Some((_, h)) => return Err(Error::Parse(format!("bad landmark CSV header '{}', expected '{HEADER}'", h.trim()))),
        None => return Err(Error::Parse("empty landmark CSV".into())),
    }
    let mut landmarks = Vec::new();
    for (n, line) in lines {
        let row = n + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 8 {
            return Err(Error::Parse(format!("line {row}: expected 8 fields, got {}", fields.len())));
        }
        let id: i64 = fields[0]
            .parse()
            .map_err(|_| Error::Parse(format!("line {row}: bad id '{}'", fields[0])))?;
        let unit: LengthUnit = fields[1].parse().map_err(|e| Error::Parse(format!("line {row}: {e}")))?;
        let mut nums = [0.0; 6];
        for (slot, f) in nums.iter_mut().zip(&fields[2..]) {
            *slot = f
                .parse()
                .map_err(|_| Error::Parse(format!("line {row}: bad number '{f}'")))?;
        }
        let (mut x, mut d) = ([nums[0], nums[1], nums[2]], [nums[3], nums[4], nums[5]]);
        if unit == LengthUnit::Voxel {
            let g = grid.ok_or_else(|| {
                Error::InvalidInput(format!("line {row}: voxel-unit landmarks need a paired volume"))
            })?;
            x = g.voxel_to_world(x);
            d = [0, 1, 2].map(|a| d[a] * g.spacing[a]);
        }
        landmarks.push(Landmark::new(id, x, d));
    }
    LandmarkSet::new(landmarks)
}

pub fn read_landmarks(path: impl AsRef<Path>, grid: Option<&Grid>) -> Result<LandmarkSet> {
    parse_landmarks(&crate::error::read_text(path.as_ref())?, grid)
}
