//! Colour-mapped uncertainty slices as binary PPM (P6).
//!
//! The colour ramp runs linearly from red `(255, 0, 0)` at `u_min` (low
//! uncertainty) to blue `(0, 0, 255)` at `u_max`; values outside the range are
//! clamped.

use crate::error::{Error, Result};
use crate::gp::DenseField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(&self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn as_str(&self) -> &'static str {
        ["x", "y", "z"][self.index()]
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(Error::Parse(format!("unknown axis '{other}'"))),
        }
    }
}

pub fn colormap(u: f64, u_min: f64, u_max: f64) -> [u8; 3] {
    let t = ((u - u_min) / (u_max - u_min)).clamp(0.0, 1.0);
    let t = if t.is_nan() { 0.0 } else { t };
    [(255.0 * (1.0 - t)).round() as u8, 0, (255.0 * t).round() as u8]
}

/// Renders the slice `index` orthogonal to `axis`.
///
/// Image columns follow the lower of the two remaining axes and rows the
/// higher one (x/y for a z-slice, x/z for a y-slice, y/z for an x-slice), with
/// row 0 at index 0.
pub fn render_uncertainty_slice(field: &DenseField, axis: Axis, index: usize, u_min: f64, u_max: f64) -> Result<Vec<u8>> {
    if !(u_min < u_max) || !u_min.is_finite() || !u_max.is_finite() {
        return Err(Error::InvalidInput(format!("colour range [{u_min}, {u_max}] is empty")));
    }
    let g = field.grid();
    let a = axis.index();
    if index >= g.dims[a] {
        let mut voxel = [0.0; 3];
        voxel[a] = index as f64;
        return Err(Error::OutOfBounds { point: g.voxel_to_world(voxel), voxel });
    }
    let (col_axis, row_axis) = match axis {
        Axis::X => (1, 2),
        Axis::Y => (0, 2),
        Axis::Z => (0, 1),
    };
    let (w, h) = (g.dims[col_axis], g.dims[row_axis]);
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.reserve(3 * w * h);
    for r in 0..h {
        for c in 0..w {
            let mut ijk = [0usize; 3];
            ijk[a] = index;
            ijk[col_axis] = c;
            ijk[row_axis] = r;
            let u = field.uncertainty()[g.index(ijk[0], ijk[1], ijk[2])];
            out.extend_from_slice(&colormap(u, u_min, u_max));
        }
    }
    Ok(out)
}
