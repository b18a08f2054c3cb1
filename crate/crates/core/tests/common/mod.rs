//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regunc::{GpModel, KernelParams, Patch, Vec3, Volume3D};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<Vec3> {
    (0..n).map(|_| [0, 1, 2].map(|_| rng.random_range(lo..hi))).collect()
}

fn sq_exp(p: Vec3, q: Vec3, a: f64) -> f64 {
    let r2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2);
    (-r2 / a).exp()
}

/// Posterior mean and per-component variance from an explicit matrix inverse.
pub struct DenseGp {
    points: Vec<Vec3>,
    a: f64,
    k_inv: DMatrix<f64>,
    disp: DMatrix<f64>,
}

impl DenseGp {
    pub fn new(points: &[Vec3], disp: &[Vec3], a: f64, jitter: f64) -> Self {
        let n = points.len();
        let k = DMatrix::from_fn(n, n, |i, j| sq_exp(points[i], points[j], a) + if i == j { jitter } else { 0.0 });
        let k_inv = k.try_inverse().expect("invertible Gram matrix");
        let disp = DMatrix::from_fn(n, 3, |i, c| disp[i][c]);
        DenseGp { points: points.to_vec(), a, k_inv, disp }
    }

    pub fn predict(&self, q: Vec3) -> (Vec3, f64) {
        let ks = DVector::from_iterator(self.points.len(), self.points.iter().map(|&x| sq_exp(x, q, self.a)));
        let mean = ks.transpose() * &self.k_inv * &self.disp;
        let var = 1.0 - (ks.transpose() * &self.k_inv * &ks)[(0, 0)];
        ([mean[(0, 0)], mean[(0, 1)], mean[(0, 2)]], var)
    }
}

pub fn naive_ssd(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        s += d * d;
    }
    s / a.len() as f64
}

/// Histogram intersection by explicit per-bin interval counting over the joint range.
pub fn naive_hi(a: &[f64], b: &[f64], bins: usize) -> f64 {
    let lo = a.iter().chain(b).cloned().fold(f64::INFINITY, f64::min);
    let mut hi = a.iter().chain(b).cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        hi = lo + 1.0;
    }
    let w = (hi - lo) / bins as f64;
    let count = |v: &[f64], bin: usize| {
        v.iter()
            .filter(|&&x| {
                let left = lo + bin as f64 * w;
                let right = lo + (bin + 1) as f64 * w;
                (x >= left || bin == 0) && (x < right || bin == bins - 1)
            })
            .count() as f64
            / v.len() as f64
    };
    let mut overlap = 0.0;
    for bin in 0..bins {
        overlap += count(a, bin).min(count(b, bin));
    }
    1.0 - overlap
}

/// Loop-and-average patch uncertainty with an explicit lattice.
pub fn naive_patch_uncertainty(model: &GpModel, center: Vec3, spacing: Vec3, k: i64) -> f64 {
    let mut total = 0.0;
    let mut n = 0usize;
    for l in -k..=k {
        for j in -k..=k {
            for i in -k..=k {
                let q = [
                    center[0] + spacing[0] * i as f64,
                    center[1] + spacing[1] * j as f64,
                    center[2] + spacing[2] * l as f64,
                ];
                total += model.predict(q).u;
                n += 1;
            }
        }
    }
    total / n as f64
}

/// Classical tie-free Spearman identity `1 - 6 sum d^2 / (M (M^2 - 1))`, ranks
/// from counting how many values are smaller.
pub fn closed_form_spearman(u: &[f64], e: &[f64]) -> f64 {
    let rank = |v: &[f64], i: usize| v.iter().filter(|&&x| x < v[i]).count() as f64 + 1.0;
    let m = u.len() as f64;
    let d2: f64 = (0..u.len()).map(|i| (rank(u, i) - rank(e, i)).powi(2)).sum();
    1.0 - 6.0 * d2 / (m * (m * m - 1.0))
}

pub fn random_patch(rng: &mut ChaCha8Rng, k: usize) -> Patch {
    let n = (2 * k + 1).pow(3);
    Patch::new([0.0; 3], k, (0..n).map(|_| rng.random_range(-3.0..5.0)).collect()).unwrap()
}

pub fn fit(points: &[Vec3], disp: &[Vec3], a: f64, jitter: f64) -> GpModel {
    GpModel::fit_points(points, disp, KernelParams::new(a, jitter).unwrap()).unwrap()
}

pub fn ramp_volume(n: usize) -> Volume3D {
    let grid = regunc::Grid::new([n, n, n], [1.0; 3], [0.0; 3]).unwrap();
    Volume3D::from_fn(grid, |p| p[0]).unwrap()
}
