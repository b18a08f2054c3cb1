//! Gaussian-process interpolation of landmark displacements.
//!
//! Each displacement component is an independent zero-mean GP with the
//! squared-exponential covariance `k(x, x') = exp(-|x - x'|^2 / a)`. All three
//! components share the kernel, so a single Cholesky factor of `K + jitter*I`
//! serves every column of the training displacements.
//!
//! For a query `q` with cross-covariance vector `k*`:
//!
//! * posterior mean: `mu = k*^T (K + jitter*I)^-1 D`
//! * marginal variance: `k(q, q) - k*^T (K + jitter*I)^-1 k*`, identical for
//!   the three components.
//!
//! The scalar uncertainty is `u = sqrt(var_x + var_y + var_z)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{norm_sq, sub, Grid, LandmarkSet, Vec3, Volume3D};

/// Default diagonal regularizer added to the Gram matrix (mm^2).
pub const DEFAULT_JITTER: f64 = 1e-8;

/// Negative variances down to this value are treated as round-off and clamped.
pub const VARIANCE_CLAMP_TOL: f64 = 1e-9;

/// Kernel length-scale `a` (mm^2) and Gram jitter (mm^2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    a: f64,
    jitter: f64,
}

impl KernelParams {
    pub fn new(a: f64, jitter: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidInput(format!("kernel a must be positive, got {a}")));
        }
        if !(jitter >= 0.0 && jitter.is_finite()) {
            return Err(Error::InvalidInput(format!("jitter must be non-negative, got {jitter}")));
        }
        Ok(KernelParams { a, jitter })
    }

    /// `a` from the median squared pairwise landmark distance.
    pub fn median_heuristic(points: &[Vec3], jitter: f64) -> Result<Self> {
        Self::new(median_sq_distance(points).unwrap_or(1.0), jitter)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }
}

/// Median of the squared pairwise distances, `None` for fewer than two points
/// or when every pair coincides.
pub fn median_sq_distance(points: &[Vec3]) -> Option<f64> {
    let mut d: Vec<f64> = Vec::with_capacity(points.len() * points.len().saturating_sub(1) / 2);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            d.push(norm_sq(sub(points[i], points[j])));
        }
    }
    if d.is_empty() {
        return None;
    }
    d.sort_by(f64::total_cmp);
    let n = d.len();
    let m = if n % 2 == 1 { d[n / 2] } else { 0.5 * (d[n / 2 - 1] + d[n / 2]) };
    (m > 0.0).then_some(m)
}

#[inline]
pub fn kernel_eval(p: Vec3, q: Vec3, params: &KernelParams) -> f64 {
    (-norm_sq(sub(p, q)) / params.a).exp()
}

/// Posterior at a single query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: Vec3,
    pub var: Vec3,
    pub u: f64,
}

/// A fitted GP interpolator. Immutable once built.
#[derive(Debug, Clone)]
pub struct GpModel {
    points: Vec<Vec3>,
    disp: Vec<Vec3>,
    params: KernelParams,
    /// Lower-triangular factor of `K + jitter*I`, row-major `n x n`.
    chol: Vec<f64>,
    alpha: Vec<Vec3>,
}

impl GpModel {
    pub fn fit(landmarks: &LandmarkSet, params: KernelParams) -> Result<Self> {
        Self::fit_points(&landmarks.positions(), &landmarks.displacements(), params)
    }

    /// Fits on raw arrays. Unlike [`LandmarkSet`], coincident points are not
    /// rejected up front; they surface as [`Error::SingularGram`].
    pub fn fit_points(points: &[Vec3], disp: &[Vec3], params: KernelParams) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("cannot fit a GP on zero landmarks".into()));
        }
        if points.len() != disp.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} positions but {} displacements",
                points.len(),
                disp.len()
            )));
        }
        let n = points.len();
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let k = kernel_eval(points[i], points[j], &params);
                gram[i * n + j] = k;
                gram[j * n + i] = k;
            }
            gram[i * n + i] += params.jitter;
        }
        let chol = cholesky(gram, n)?;

        let mut alpha = disp.to_vec();
        for c in 0..3 {
            let mut col: Vec<f64> = disp.iter().map(|d| d[c]).collect();
            forward_substitute(&chol, n, &mut col);
            backward_substitute_transposed(&chol, n, &mut col);
            for (a, v) in alpha.iter_mut().zip(col) {
                a[c] = v;
            }
        }

        Ok(GpModel {
            points: points.to_vec(),
            disp: disp.to_vec(),
            params,
            chol,
            alpha,
        })
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn train_points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn train_displacements(&self) -> &[Vec3] {
        &self.disp
    }

    /// Row-major lower Cholesky factor of `K + jitter*I`.
    pub fn cholesky_factor(&self) -> &[f64] {
        &self.chol
    }

    /// Solved coefficients `(K + jitter*I)^-1 D`.
    pub fn alpha(&self) -> &[Vec3] {
        &self.alpha
    }

    fn cross_covariance(&self, q: Vec3) -> Vec<f64> {
        self.points.iter().map(|&x| kernel_eval(x, q, &self.params)).collect()
    }

    /// Unclamped marginal variance at `q` (shared by all components).
    pub fn raw_variance(&self, q: Vec3) -> f64 {
        let mut v = self.cross_covariance(q);
        forward_substitute(&self.chol, self.len(), &mut v);
        1.0 - v.iter().map(|x| x * x).sum::<f64>()
    }

    pub fn predict(&self, q: Vec3) -> Prediction {
        let kstar = self.cross_covariance(q);
        let mut mean = [0.0; 3];
        for (k, a) in kstar.iter().zip(&self.alpha) {
            mean[0] += k * a[0];
            mean[1] += k * a[1];
            mean[2] += k * a[2];
        }
        let mut v = kstar;
        forward_substitute(&self.chol, self.len(), &mut v);
        let raw = 1.0 - v.iter().map(|x| x * x).sum::<f64>();
        let var = raw.max(0.0);
        Prediction {
            mean,
            var: [var; 3],
            u: (var + var + var).sqrt(),
        }
    }

    /// Predictions for many queries, in input order.
    pub fn predict_many(&self, queries: &[Vec3]) -> Vec<Prediction> {
        queries.par_iter().map(|&q| self.predict(q)).collect()
    }

    /// Evaluates the posterior at every `stride`-th voxel centre of `vol`.
    pub fn dense_field(&self, vol: &Volume3D, stride: usize) -> Result<DenseField> {
        self.dense_field_on(vol.grid(), stride)
    }

    pub fn dense_field_on(&self, grid: &Grid, stride: usize) -> Result<DenseField> {
        if stride == 0 {
            return Err(Error::InvalidInput("stride must be at least 1".into()));
        }
        let dims = grid.dims.map(|d| d.div_ceil(stride));
        let field_grid = Grid::new(dims, grid.spacing.map(|s| s * stride as f64), grid.origin)?;
        let mut queries = Vec::with_capacity(field_grid.len());
        for l in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    queries.push(field_grid.voxel_center(i, j, l));
                }
            }
        }
        let preds = self.predict_many(&queries);
        Ok(DenseField {
            grid: field_grid,
            mean: preds.iter().map(|p| p.mean).collect(),
            u: preds.iter().map(|p| p.u).collect(),
        })
    }
}

/// Per-grid-point predicted displacement and scalar uncertainty.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseField {
    grid: Grid,
    mean: Vec<Vec3>,
    u: Vec<f64>,
}

impl DenseField {
    pub fn new(grid: Grid, mean: Vec<Vec3>, u: Vec<f64>) -> Result<Self> {
        if mean.len() != grid.len() || u.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "dense field of {} points with {} means and {} uncertainties",
                grid.len(),
                mean.len(),
                u.len()
            )));
        }
        Ok(DenseField { grid, mean, u })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn mean(&self) -> &[Vec3] {
        &self.mean
    }

    pub fn uncertainty(&self) -> &[f64] {
        &self.u
    }

    /// Uncertainty as a scalar volume on the field grid.
    pub fn uncertainty_volume(&self) -> Volume3D {
        Volume3D::new(self.grid, self.u.clone()).expect("field shape is validated")
    }

    /// One displacement component as a scalar volume on the field grid.
    pub fn component_volume(&self, axis: usize) -> Volume3D {
        Volume3D::new(self.grid, self.mean.iter().map(|m| m[axis]).collect())
            .expect("field shape is validated")
    }
}

/// In-place Cholesky of a symmetric row-major matrix; returns the lower factor
/// with a zeroed upper triangle.
fn cholesky(mut a: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    let tol = n as f64 * f64::EPSILON;
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= a[j * n + k] * a[j * n + k];
        }
        if !(diag > tol * a[j * n + j].abs()) {
            return Err(Error::SingularGram { index: j, pivot: diag });
        }
        let ljj = diag.sqrt();
        a[j * n + j] = ljj;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / ljj;
        }
        for k in j + 1..n {
            a[j * n + k] = 0.0;
        }
    }
    Ok(a)
}

/// Solves `L y = b` in place.
fn forward_substitute(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let row = &l[i * n..i * n + i];
        let s: f64 = row.iter().zip(&b[..i]).map(|(a, x)| a * x).sum();
        b[i] = (b[i] - s) / l[i * n + i];
    }
}

/// Solves `L^T x = y` in place.
fn backward_substitute_transposed(l: &[f64], n: usize, y: &mut [f64]) {
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Grid, Landmark};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(rng: &mut ChaCha8Rng, n: usize, extent: f64) -> Vec<Vec3> {
        (0..n)
            .map(|_| [rng.random::<f64>() * extent, rng.random::<f64>() * extent, rng.random::<f64>() * extent])
            .collect()
    }

    #[test]
    fn kernel_values() {
        let p = KernelParams::new(4.0, 0.0).unwrap();
        assert_eq!(kernel_eval([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], &p), 1.0);
        let k = kernel_eval([0.0; 3], [2.0, 0.0, 0.0], &p);
        assert!((k - (-1.0f64).exp()).abs() < 1e-15);
        assert!((k - 0.367879).abs() < 1e-6);
        let (a, b) = ([0.3, -1.0, 2.0], [4.0, 0.5, -0.25]);
        assert_eq!(kernel_eval(a, b, &p), kernel_eval(b, a, &p));
    }

    #[test]
    fn kernel_params_validation() {
        assert!(KernelParams::new(0.0, 0.0).is_err());
        assert!(KernelParams::new(1.0, -1e-12).is_err());
        assert!(KernelParams::new(f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn median_heuristic_value() {
        // pairwise squared distances: 1, 4, 9 -> median 4
        let pts = [[0.0; 3], [1.0, 0.0, 0.0], [3.0, 0.0, 0.0]];
        assert_eq!(median_sq_distance(&pts), Some(4.0));
        assert_eq!(KernelParams::median_heuristic(&pts[..1], 0.0).unwrap().a(), 1.0);
    }

    #[test]
    fn single_landmark() {
        let m = GpModel::fit_points(&[[0.0; 3]], &[[1.0, 0.0, 0.0]], KernelParams::new(1.0, 0.0).unwrap())
            .unwrap();
        assert_eq!(m.cholesky_factor(), &[1.0]);
        assert_eq!(m.alpha(), &[[1.0, 0.0, 0.0]]);
    }

    #[test]
    fn coincident_landmarks_are_singular() {
        let p = KernelParams::new(1.0, 0.0).unwrap();
        let err = GpModel::fit_points(&[[1.0; 3], [1.0; 3]], &[[0.0; 3], [1.0; 3]], p).unwrap_err();
        assert!(matches!(err, Error::SingularGram { index: 1, .. }));
    }

    #[test]
    fn empty_set_is_invalid() {
        let p = KernelParams::new(1.0, 0.0).unwrap();
        assert!(matches!(GpModel::fit_points(&[], &[], p), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn cholesky_reconstructs_gram() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts = random_points(&mut rng, 20, 50.0);
        let disp = random_points(&mut rng, 20, 2.0);
        let params = KernelParams::new(150.0, 1e-8).unwrap();
        let m = GpModel::fit_points(&pts, &disp, params).unwrap();
        let l = m.cholesky_factor();
        let n = 20;
        let mut max_diff: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let llt: f64 = (0..n).map(|k| l[i * n + k] * l[j * n + k]).sum();
                let direct = kernel_eval(pts[i], pts[j], &params) + if i == j { params.jitter() } else { 0.0 };
                max_diff = max_diff.max((llt - direct).abs());
            }
            assert_eq!(kernel_eval(pts[i], pts[i], &params) + params.jitter(), 1.0 + 1e-8);
        }
        assert!(max_diff <= 1e-10, "max diff {max_diff}");

        // (K + jitter I) alpha = D
        for i in 0..n {
            for c in 0..3 {
                let s: f64 = (0..n)
                    .map(|j| {
                        let kij = kernel_eval(pts[i], pts[j], &params) + if i == j { params.jitter() } else { 0.0 };
                        kij * m.alpha()[j][c]
                    })
                    .sum();
                assert!((s - disp[i][c]).abs() <= 1e-8 * disp[i][c].abs().max(1.0));
            }
        }
    }

    #[test]
    fn exact_at_training_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts = random_points(&mut rng, 40, 50.0);
        let disp = random_points(&mut rng, 40, 3.0);
        let m = GpModel::fit_points(&pts, &disp, KernelParams::new(25.0, 0.0).unwrap()).unwrap();
        for (x, d) in pts.iter().zip(&disp) {
            let p = m.predict(*x);
            for c in 0..3 {
                assert!((p.mean[c] - d[c]).abs() <= 1e-8);
                assert!(p.var[c] <= 1e-8);
            }
        }
    }

    #[test]
    fn far_queries_revert_to_prior() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts = random_points(&mut rng, 10, 10.0);
        let disp = random_points(&mut rng, 10, 3.0);
        let params = KernelParams::new(4.0, 0.0).unwrap();
        let m = GpModel::fit_points(&pts, &disp, params).unwrap();
        // sqrt(50 * 4) ~ 14.2 mm beyond the cloud
        let p = m.predict([40.0, 40.0, 40.0]);
        for c in 0..3 {
            assert!(p.mean[c].abs() <= 1e-6);
            assert!((p.var[c] - 1.0).abs() <= 1e-6);
        }
        assert!((p.u - 3f64.sqrt()).abs() <= 1e-6);
    }

    #[test]
    fn translation_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts = random_points(&mut rng, 15, 20.0);
        let disp = random_points(&mut rng, 15, 3.0);
        let params = KernelParams::new(30.0, 1e-8).unwrap();
        let shift = [0.25, -0.5, 0.125];
        let moved: Vec<Vec3> = pts.iter().map(|p| crate::field::add(*p, shift)).collect();
        let m1 = GpModel::fit_points(&pts, &disp, params).unwrap();
        let m2 = GpModel::fit_points(&moved, &disp, params).unwrap();
        for q in random_points(&mut rng, 20, 20.0) {
            let a = m1.predict(q);
            let b = m2.predict(crate::field::add(q, shift));
            for c in 0..3 {
                assert!((a.mean[c] - b.mean[c]).abs() <= 1e-10);
                assert!((a.var[c] - b.var[c]).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn dense_field_plane_of_three() {
        let lms = LandmarkSet::new(vec![
            Landmark::new(0, [2.0, 2.0, 0.0], [1.0, 0.0, 0.0]),
            Landmark::new(1, [7.0, 3.0, 0.0], [0.0, 1.0, 0.0]),
            Landmark::new(2, [4.0, 8.0, 0.0], [-1.0, -1.0, 0.0]),
        ])
        .unwrap();
        let m = GpModel::fit(&lms, KernelParams::new(10.0, 0.0).unwrap()).unwrap();
        let vol = Volume3D::filled(Grid::new([10, 10, 1], [1.0; 3], [0.0; 3]).unwrap(), 0.0).unwrap();
        let f = m.dense_field(&vol, 1).unwrap();
        assert_eq!(f.len(), 100);
        assert_eq!(f.mean().len(), 100);
        // a landmark sits on a grid node
        let at = f.grid().index(2, 2, 0);
        assert!((f.mean()[at][0] - 1.0).abs() < 1e-9);
        assert!(f.uncertainty()[at] < 1e-4);
    }

    #[test]
    fn dense_field_single_point() {
        let m = GpModel::fit_points(&[[1.0; 3]], &[[1.0, 2.0, 3.0]], KernelParams::new(5.0, 0.0).unwrap()).unwrap();
        let vol = Volume3D::filled(Grid::new([4, 5, 6], [1.0; 3], [0.0; 3]).unwrap(), 0.0).unwrap();
        let f = m.dense_field(&vol, 6).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.mean()[0], m.predict([0.0; 3]).mean);
        assert!(m.dense_field(&vol, 0).is_err());
    }

    #[test]
    fn dense_field_uncertainty_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..5 {
            let n = rng.random_range(1..15);
            let pts = random_points(&mut rng, n, 12.0);
            let disp = random_points(&mut rng, n, 3.0);
            let jitter = rng.random::<f64>() * 1e-3;
            let m = GpModel::fit_points(&pts, &disp, KernelParams::new(9.0, jitter).unwrap()).unwrap();
            let vol = Volume3D::filled(Grid::new([12, 12, 12], [1.0; 3], [0.0; 3]).unwrap(), 0.0).unwrap();
            let f = m.dense_field(&vol, 2).unwrap();
            let bound = 3f64.sqrt() * (1.0 + jitter).sqrt();
            assert!(f.uncertainty().iter().all(|&u| (0.0..=bound).contains(&u)));
        }
    }
}
