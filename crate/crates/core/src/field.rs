//! Volumes, landmarks and patches.
//!
//! World coordinates are millimetres: `world = origin + spacing * voxel`,
//! component-wise. Voxel storage is x-fastest, i.e. the linear index of
//! `(i, j, l)` is `i + nx * (j + ny * l)`.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// A point or vector in 3-D (millimetres unless stated otherwise).
pub type Vec3 = [f64; 3];

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn norm_sq(a: Vec3) -> f64 {
    a[0] * a[0] + a[1] * a[1] + a[2] * a[2]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    norm_sq(a).sqrt()
}

fn all_finite(v: Vec3) -> bool {
    v.iter().all(|c| c.is_finite())
}

/// Grid geometry shared by volumes and dense fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub dims: [usize; 3],
    pub spacing: Vec3,
    pub origin: Vec3,
}

impl Grid {
    pub fn new(dims: [usize; 3], spacing: Vec3, origin: Vec3) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidInput(format!("grid dims must be positive, got {dims:?}")));
        }
        if spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidInput(format!(
                "grid spacing must be positive and finite, got {spacing:?}"
            )));
        }
        if !all_finite(origin) {
            return Err(Error::InvalidInput(format!("grid origin must be finite, got {origin:?}")));
        }
        Ok(Grid { dims, spacing, origin })
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, l: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * l)
    }

    pub fn world_to_voxel(&self, p: Vec3) -> Vec3 {
        [
            (p[0] - self.origin[0]) / self.spacing[0],
            (p[1] - self.origin[1]) / self.spacing[1],
            (p[2] - self.origin[2]) / self.spacing[2],
        ]
    }

    pub fn voxel_to_world(&self, v: Vec3) -> Vec3 {
        [
            self.origin[0] + self.spacing[0] * v[0],
            self.origin[1] + self.spacing[1] * v[1],
            self.origin[2] + self.spacing[2] * v[2],
        ]
    }

    /// World position of the centre of voxel `(i, j, l)`.
    pub fn voxel_center(&self, i: usize, j: usize, l: usize) -> Vec3 {
        self.voxel_to_world([i as f64, j as f64, l as f64])
    }

    /// Whether continuous voxel coordinates lie inside `[0, dims - 1]` on every axis.
    pub fn contains_voxel(&self, v: Vec3) -> bool {
        (0..3).all(|a| v[a] >= 0.0 && v[a] <= (self.dims[a] - 1) as f64)
    }

    /// World-space points of the `(2k+1)^3` lattice centred at `center`, in
    /// x-fastest order. Fails if any point leaves the grid.
    pub fn patch_lattice(&self, center: Vec3, k: usize) -> Result<Vec<Vec3>> {
        let side = 2 * k + 1;
        let mut points = Vec::with_capacity(side * side * side);
        let k = k as i64;
        for l in -k..=k {
            for j in -k..=k {
                for i in -k..=k {
                    let p = [
                        center[0] + self.spacing[0] * i as f64,
                        center[1] + self.spacing[1] * j as f64,
                        center[2] + self.spacing[2] * l as f64,
                    ];
                    let v = self.world_to_voxel(p);
                    if !self.contains_voxel(v) {
                        return Err(Error::OutOfBounds { point: p, voxel: v });
                    }
                    points.push(p);
                }
            }
        }
        Ok(points)
    }
}

/// Scalar intensity volume.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume3D {
    grid: Grid,
    voxels: Vec<f64>,
}

impl Volume3D {
    pub fn new(grid: Grid, voxels: Vec<f64>) -> Result<Self> {
        if voxels.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} voxels for dims {:?}",
                voxels.len(),
                grid.dims
            )));
        }
        if let Some(pos) = voxels.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite intensity at voxel {pos}")));
        }
        Ok(Volume3D { grid, voxels })
    }

    /// Volume filled with a constant value.
    pub fn filled(grid: Grid, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.len()])
    }

    /// Volume whose intensity at each voxel centre is `f(world position)`.
    pub fn from_fn(grid: Grid, f: impl Fn(Vec3) -> f64) -> Result<Self> {
        let mut voxels = Vec::with_capacity(grid.len());
        for l in 0..grid.dims[2] {
            for j in 0..grid.dims[1] {
                for i in 0..grid.dims[0] {
                    voxels.push(f(grid.voxel_center(i, j, l)));
                }
            }
        }
        Self::new(grid, voxels)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dims(&self) -> [usize; 3] {
        self.grid.dims
    }

    pub fn spacing(&self) -> Vec3 {
        self.grid.spacing
    }

    pub fn origin(&self) -> Vec3 {
        self.grid.origin
    }

    pub fn voxels(&self) -> &[f64] {
        &self.voxels
    }

    pub fn get(&self, i: usize, j: usize, l: usize) -> f64 {
        self.voxels[self.grid.index(i, j, l)]
    }

    pub fn world_to_voxel(&self, p: Vec3) -> Vec3 {
        self.grid.world_to_voxel(p)
    }

    pub fn voxel_to_world(&self, v: Vec3) -> Vec3 {
        self.grid.voxel_to_world(v)
    }

    /// Trilinear interpolation at world point `p`.
    ///
    /// Exact at voxel centres and for constant volumes.
    pub fn trilinear_sample(&self, p: Vec3) -> Result<f64> {
        let v = self.world_to_voxel(p);
        if !self.grid.contains_voxel(v) {
            return Err(Error::OutOfBounds { point: p, voxel: v });
        }
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        let mut t = [0.0; 3];
        for a in 0..3 {
            let f = v[a].floor();
            lo[a] = f as usize;
            t[a] = v[a] - f;
            hi[a] = (lo[a] + 1).min(self.grid.dims[a] - 1);
        }
        let lerp = |a: f64, b: f64, t: f64| if t == 0.0 { a } else { a + t * (b - a) };
        let mut plane = [0.0; 2];
        for (pz, &l) in [lo[2], hi[2]].iter().enumerate() {
            let mut row = [0.0; 2];
            for (py, &j) in [lo[1], hi[1]].iter().enumerate() {
                row[py] = lerp(self.get(lo[0], j, l), self.get(hi[0], j, l), t[0]);
            }
            plane[pz] = lerp(row[0], row[1], t[1]);
        }
        Ok(lerp(plane[0], plane[1], t[2]))
    }

    /// Samples the `(2k+1)^3` lattice centred at `center` with one-voxel steps.
    /// Out-of-bounds lattices are rejected, never clamped.
    pub fn extract_patch(&self, center: Vec3, k: usize) -> Result<Patch> {
        let values = self
            .grid
            .patch_lattice(center, k)?
            .into_iter()
            .map(|p| self.trilinear_sample(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Patch { center, k, values })
    }
}

/// A landmark position in the fixed frame and its displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Landmark {
    pub id: i64,
    pub x: Vec3,
    pub d: Vec3,
}

impl Landmark {
    pub fn new(id: i64, x: Vec3, d: Vec3) -> Self {
        Landmark { id, x, d }
    }
}

/// Ordered landmark collection with unique ids and distinct positions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LandmarkSet {
    landmarks: Vec<Landmark>,
}

impl LandmarkSet {
    pub fn new(landmarks: Vec<Landmark>) -> Result<Self> {
        let mut ids = HashSet::with_capacity(landmarks.len());
        let mut positions = HashSet::with_capacity(landmarks.len());
        for lm in &landmarks {
            if !all_finite(lm.x) || !all_finite(lm.d) {
                return Err(Error::InvalidInput(format!("landmark {} has non-finite components", lm.id)));
            }
            if !ids.insert(lm.id) {
                return Err(Error::InvalidInput(format!("duplicate landmark id {}", lm.id)));
            }
            // -0.0 and 0.0 are the same position
            let key = lm.x.map(|c| (c + 0.0).to_bits());
            if !positions.insert(key) {
                return Err(Error::InvalidInput(format!(
                    "landmark {} duplicates position {:?}",
                    lm.id, lm.x
                )));
            }
        }
        Ok(LandmarkSet { landmarks })
    }

    pub fn landmarks(&self) -> &[Landmark] {
        &self.landmarks
    }

    pub fn len(&self) -> usize {
        self.landmarks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.landmarks.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Landmark> {
        self.landmarks.iter()
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.landmarks.iter().map(|l| l.x).collect()
    }

    pub fn displacements(&self) -> Vec<Vec3> {
        self.landmarks.iter().map(|l| l.d).collect()
    }
}

impl<'a> IntoIterator for &'a LandmarkSet {
    type Item = &'a Landmark;
    type IntoIter = std::slice::Iter<'a, Landmark>;
    fn into_iter(self) -> Self::IntoIter {
        self.landmarks.iter()
    }
}

/// Cubic patch of side `2k+1`, values in x-fastest order.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    center: Vec3,
    k: usize,
    values: Vec<f64>,
}

impl Patch {
    pub fn new(center: Vec3, k: usize, values: Vec<f64>) -> Result<Self> {
        let side = 2 * k + 1;
        if values.len() != side * side * side {
            return Err(Error::ShapeMismatch(format!(
                "patch with k={k} needs {} values, got {}",
                side * side * side,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite patch value".into()));
        }
        Ok(Patch { center, k, values })
    }

    pub fn center(&self) -> Vec3 {
        self.center
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
