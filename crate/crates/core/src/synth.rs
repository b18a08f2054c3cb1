//! Synthetic phantoms with a closed-form ground-truth deformation.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)`, consumed in
//! a fixed documented order, so every output is a pure function of its spec.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{add, norm_sq, sub, Grid, Landmark, LandmarkSet, Vec3, Volume3D};

/// One Gaussian displacement bump: `amplitude * exp(-|x - center|^2 / width^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: Vec3,
    pub amplitude: Vec3,
    pub width: f64,
}

/// Ground-truth deformation as a sum of Gaussian bumps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DeformationSpec {
    bumps: Vec<Bump>,
}

impl DeformationSpec {
    pub fn new(bumps: Vec<Bump>) -> Result<Self> {
        for (i, b) in bumps.iter().enumerate() {
            if !(b.width > 0.0 && b.width.is_finite()) {
                return Err(Error::InvalidInput(format!("bump {i} has non-positive width {}", b.width)));
            }
            if b.center.iter().chain(&b.amplitude).any(|c| !c.is_finite()) {
                return Err(Error::InvalidInput(format!("bump {i} has non-finite parameters")));
            }
        }
        Ok(DeformationSpec { bumps })
    }

    pub fn identity() -> Self {
        DeformationSpec::default()
    }

    /// `n` random bumps inside `grid`.
    ///
    /// Draw order per bump: center (x, y, z) uniform over the grid extent,
    /// amplitude (x, y, z) uniform in `[-max_amplitude, max_amplitude]`,
    /// width uniform in `[0.15, 0.35]` times the smallest grid extent.
    pub fn random(seed: u64, grid: &Grid, n: usize, max_amplitude: f64) -> Result<Self> {
        if !(max_amplitude >= 0.0 && max_amplitude.is_finite()) {
            return Err(Error::InvalidInput(format!("invalid bump amplitude {max_amplitude}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let extent = extent(grid);
        let min_extent = extent.iter().cloned().fold(f64::INFINITY, f64::min).max(grid.spacing[0]);
        let bumps = (0..n)
            .map(|_| {
                let center = [0, 1, 2].map(|a| grid.origin[a] + rng.random::<f64>() * extent[a]);
                let amplitude = [0, 1, 2].map(|_| (2.0 * rng.random::<f64>() - 1.0) * max_amplitude);
                let width = (0.15 + 0.2 * rng.random::<f64>()) * min_extent;
                Bump { center, amplitude, width }
            })
            .collect();
        Self::new(bumps)
    }

    pub fn bumps(&self) -> &[Bump] {
        &self.bumps
    }

    /// Ground-truth displacement at world point `x`.
    pub fn eval(&self, x: Vec3) -> Vec3 {
        let mut d = [0.0; 3];
        for b in &self.bumps {
            let w = (-norm_sq(sub(x, b.center)) / (b.width * b.width)).exp();
            for a in 0..3 {
                d[a] += b.amplitude[a] * w;
            }
        }
        d
    }
}

fn extent(grid: &Grid) -> Vec3 {
    [0, 1, 2].map(|a| grid.spacing[a] * (grid.dims[a] - 1) as f64)
}

/// Parameters of a random blob phantom.
#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub seed: u64,
    pub dims: [usize; 3],
    pub spacing: Vec3,
    pub blob_count: usize,
    pub noise_sigma: f64,
}

/// Gaussian intensity blob `amplitude * exp(-|x - center|^2 / width^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Blob {
    pub center: Vec3,
    pub width: f64,
    pub amplitude: f64,
}

impl PhantomSpec {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dims, self.spacing, [0.0; 3])
    }

    fn validate(&self) -> Result<Grid> {
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidInput(format!("invalid noise sigma {}", self.noise_sigma)));
        }
        self.grid()
    }

    fn draw_blobs(&self, grid: &Grid, rng: &mut ChaCha8Rng) -> Vec<Blob> {
        let extent = extent(grid);
        let mean_spacing = grid.spacing.iter().sum::<f64>() / 3.0;
        (0..self.blob_count)
            .map(|_| {
                let center = [0, 1, 2].map(|a| grid.origin[a] + rng.random::<f64>() * extent[a]);
                let width = (2.0 + 4.0 * rng.random::<f64>()) * mean_spacing;
                let amplitude = 0.5 + rng.random::<f64>();
                Blob { center, width, amplitude }
            })
            .collect()
    }

    /// The blobs [`make_phantom`] draws for this spec.
    ///
    /// Draw order per blob: center (x, y, z) uniform over the grid extent,
    /// width uniform in `[2, 6]` mean voxel spacings, amplitude uniform in `[0.5, 1.5]`.
    pub fn blobs(&self) -> Result<Vec<Blob>> {
        let grid = self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        Ok(self.draw_blobs(&grid, &mut rng))
    }
}

/// Sum of random Gaussian blobs plus i.i.d. normal noise (drawn after the
/// blobs, one sample per voxel in x-fastest order).
pub fn make_phantom(spec: &PhantomSpec) -> Result<Volume3D> {
    let grid = spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let blobs = spec.draw_blobs(&grid, &mut rng);
    let mut vol = Volume3D::from_fn(grid, |p| {
        blobs
            .iter()
            .map(|b| b.amplitude * (-norm_sq(sub(p, b.center)) / (b.width * b.width)).exp())
            .sum()
    })?;
    if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let voxels: Vec<f64> = vol.voxels().iter().map(|v| v + normal.sample(&mut rng)).collect();
        vol = Volume3D::new(grid, voxels)?;
    }
    Ok(vol)
}

/// Result of backward warping.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedVolume {
    pub volume: Volume3D,
    /// Fraction of output voxels whose source point fell outside the input (zero-filled).
    pub out_of_bounds_fraction: f64,
}

/// Backward warp: `out(x) = fixed(x + d(x))`, zero where `x + d(x)` leaves the volume.
pub fn warp_volume(fixed: &Volume3D, spec: &DeformationSpec) -> WarpedVolume {
    let grid = *fixed.grid();
    let points: Vec<Vec3> = (0..grid.dims[2])
        .flat_map(|l| (0..grid.dims[1]).flat_map(move |j| (0..grid.dims[0]).map(move |i| (i, j, l))))
        .map(|(i, j, l)| grid.voxel_center(i, j, l))
        .collect();
    let samples: Vec<Option<f64>> = points
        .par_iter()
        .map(|&p| fixed.trilinear_sample(add(p, spec.eval(p))).ok())
        .collect();
    let oob = samples.iter().filter(|s| s.is_none()).count();
    let voxels = samples.into_iter().map(|s| s.unwrap_or(0.0)).collect();
    WarpedVolume {
        volume: Volume3D::new(grid, voxels).expect("warp preserves geometry"),
        out_of_bounds_fraction: oob as f64 / grid.len() as f64,
    }
}

/// Draws `n_train + n_test` distinct voxel-centre positions at least `margin`
/// voxels from every face, without replacement, and labels each with the exact
/// ground-truth displacement. Training ids are `0..n_train`, test ids follow.
pub fn sample_landmarks(
    spec: &DeformationSpec,
    grid: &Grid,
    n_train: usize,
    n_test: usize,
    seed: u64,
    margin: usize,
) -> Result<(LandmarkSet, LandmarkSet)> {
    if n_train < 1 || n_test < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 1 training and 2 test landmarks, got {n_train} and {n_test}"
        )));
    }
    let span = grid.dims.map(|d| (d + 1).saturating_sub(2 * margin + 1));
    let capacity = span[0] * span[1] * span[2];
    let wanted = n_train + n_test;
    if wanted > capacity {
        return Err(Error::InvalidInput(format!(
            "interior with margin {margin} holds {capacity} voxels, {wanted} landmarks requested"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = index::sample(&mut rng, capacity, wanted);
    let landmarks: Vec<Landmark> = picks
        .iter()
        .enumerate()
        .map(|(n, flat)| {
            let i = flat % span[0];
            let j = (flat / span[0]) % span[1];
            let l = flat / (span[0] * span[1]);
            let x = grid.voxel_center(i + margin, j + margin, l + margin);
            Landmark::new(n as i64, x, spec.eval(x))
        })
        .collect();
    let (train, test) = landmarks.split_at(n_train);
    Ok((LandmarkSet::new(train.to_vec())?, LandmarkSet::new(test.to_vec())?))
}
