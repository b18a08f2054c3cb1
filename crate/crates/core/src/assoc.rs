//! Association between GP uncertainty and registration error.
//!
//! Two experiments are provided. The point-wise one pairs each held-out
//! landmark's predicted uncertainty `u` with its registration error
//! `|d_g - d_*|`. The patch-wise one pairs the mean uncertainty over a cubic
//! patch with an intensity dissimilarity (SSD or histogram intersection)
//! between the patch at the true mapped position and the patch at the
//! predicted mapped position. Either way the result is Spearman's rho over
//! all records.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{add, norm, sub, LandmarkSet, Patch, Vec3, Volume3D};
use crate::gp::{GpModel, KernelParams};
use crate::rank::spearman_rho;

/// Default number of intensity bins for histogram intersection.
pub const DEFAULT_BINS: usize = 32;

/// Patch dissimilarity metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Mean squared intensity difference.
    Ssd,
    /// Histogram intersection dissimilarity, `1 - sum(min(p, q))`.
    Hi,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Ssd => "ssd",
            Metric::Hi => "hi",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ssd" => Ok(Metric::Ssd),
            "hi" => Ok(Metric::Hi),
            other => Err(Error::Parse(format!("unknown metric '{other}' (expected ssd or hi)"))),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub landmark_id: i64,
    pub u: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchRecord {
    pub landmark_id: i64,
    pub u_patch: f64,
    pub eps_patch: f64,
    pub metric: Metric,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Records {
    Point(Vec<PointRecord>),
    Patch(Vec<PatchRecord>),
}

impl Records {
    pub fn len(&self) -> usize {
        match self {
            Records::Point(r) => r.len(),
            Records::Patch(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(uncertainty, error)` columns.
    pub fn samples(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Records::Point(r) => r.iter().map(|r| (r.u, r.eps)).unzip(),
            Records::Patch(r) => r.iter().map(|r| (r.u_patch, r.eps_patch)).unzip(),
        }
    }
}

/// Spearman's rho, or a marker that one of the samples was constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rho {
    Value(f64),
    Degenerate,
}

/// Parameters echoed into every report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub kernel_a: f64,
    pub jitter: f64,
    pub patch: Option<PatchConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchConfig {
    pub k: usize,
    pub metric: Metric,
    pub bins: usize,
}

impl PatchConfig {
    pub fn new(k: usize, metric: Metric, bins: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidInput("patch-wise experiment needs k >= 1".into()));
        }
        if bins < 1 {
            return Err(Error::InvalidInput("histogram needs at least one bin".into()));
        }
        Ok(PatchConfig { k, metric, bins })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssociationReport {
    pub config: ExperimentConfig,
    pub records: Records,
    pub rho: Rho,
    /// Test landmarks skipped because a patch left the volume.
    pub dropped: usize,
}

impl AssociationReport {
    fn from_records(config: ExperimentConfig, records: Records, dropped: usize) -> Result<Self> {
        let (u, e) = records.samples();
        let rho = match spearman_rho(&u, &e) {
            Ok(v) => Rho::Value(v),
            Err(Error::Degenerate(_)) if records.len() >= 2 => Rho::Degenerate,
            Err(err) => return Err(err),
        };
        Ok(AssociationReport { config, records, rho, dropped })
    }

    pub fn m(&self) -> usize {
        self.records.len()
    }

    /// The coefficient, or [`Error::Degenerate`] when a sample was constant.
    pub fn rho(&self) -> Result<f64> {
        match self.rho {
            Rho::Value(v) => Ok(v),
            Rho::Degenerate => Err(Error::Degenerate(
                "uncertainty or error sample is constant; rank correlation undefined".into(),
            )),
        }
    }
}

/// Euclidean registration error `|d_g - d_*|`.
pub fn pointwise_error(d_g: Vec3, d_star: Vec3) -> f64 {
    norm(sub(d_g, d_star))
}

fn check_disjoint(train: &LandmarkSet, test: &LandmarkSet) -> Result<()> {
    for t in test {
        if let Some(tr) = train.iter().find(|tr| tr.x == t.x) {
            return Err(Error::DisjointnessViolation { test_id: t.id, train_id: tr.id });
        }
    }
    Ok(())
}

fn sorted_test(test: &LandmarkSet) -> Vec<crate::field::Landmark> {
    let mut lms = test.landmarks().to_vec();
    lms.sort_by_key(|l| l.id);
    lms
}

/// Fits on `train`, predicts every `test` landmark and correlates `u` with `|d_g - d_*|`.
pub fn pointwise_experiment(
    train: &LandmarkSet,
    test: &LandmarkSet,
    params: KernelParams,
) -> Result<AssociationReport> {
    if test.len() < 2 {
        return Err(Error::Degenerate(format!(
            "point-wise experiment needs at least 2 test landmarks, got {}",
            test.len()
        )));
    }
    check_disjoint(train, test)?;
    let model = GpModel::fit(train, params)?;
    let records = sorted_test(test)
        .iter()
        .map(|lm| {
            let p = model.predict(lm.x);
            PointRecord {
                landmark_id: lm.id,
                u: p.u,
                eps: pointwise_error(lm.d, p.mean),
            }
        })
        .collect();
    let config = ExperimentConfig {
        kernel_a: params.a(),
        jitter: params.jitter(),
        patch: None,
    };
    AssociationReport::from_records(config, Records::Point(records), 0)
}

/// Mean squared difference over corresponding voxels.
pub fn ssd(a: &Patch, b: &Patch) -> Result<f64> {
    if a.k() != b.k() || a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!("patches with k={} and k={}", a.k(), b.k())));
    }
    let sum: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.len() as f64)
}

/// Intensity probability mass function over `bins` equal-width bins on `[lo, hi]`.
/// Values outside the range land in the end bins.
pub fn histogram_pmf(p: &Patch, bins: usize, lo: f64, hi: f64) -> Result<Vec<f64>> {
    if bins == 0 {
        return Err(Error::InvalidInput("histogram needs at least one bin".into()));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!("invalid histogram range [{lo}, {hi}]")));
    }
    let mut counts = vec![0usize; bins];
    let width = hi - lo;
    for &v in p.values() {
        let t = ((v - lo) / width * bins as f64).floor();
        let idx = if t < 0.0 { 0 } else { (t as usize).min(bins - 1) };
        counts[idx] += 1;
    }
    let n = p.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / n).collect())
}

/// `1 - sum_i min(p_i, q_i)`; 0 for identical histograms, 1 for disjoint supports.
pub fn histogram_intersection(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::InvalidInput(format!(
            "pmfs of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    for (name, pmf) in [("p", p), ("q", q)] {
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-9 || pmf.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidInput(format!("{name} is not a pmf (sums to {total})")));
        }
    }
    // dividing by the realised mass keeps HI(p, p) = 0 and disjoint = 1 exact
    // even when count/N entries do not sum to exactly 1
    let overlap: f64 = p.iter().zip(q).map(|(a, b)| a.min(*b)).sum();
    let mass = 0.5 * (p.iter().sum::<f64>() + q.iter().sum::<f64>());
    Ok((1.0 - overlap / mass).clamp(0.0, 1.0))
}

/// Histogram intersection of two patches over their joint intensity range.
pub fn patch_histogram_intersection(a: &Patch, b: &Patch, bins: usize) -> Result<f64> {
    if a.k() != b.k() || a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!("patches with k={} and k={}", a.k(), b.k())));
    }
    let (lo, mut hi) = a
        .values()
        .iter()
        .chain(b.values())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo == hi {
        // both patches are the same constant
        hi = lo + 1.0;
    }
    let p = histogram_pmf(a, bins, lo, hi)?;
    let q = histogram_pmf(b, bins, lo, hi)?;
    histogram_intersection(&p, &q)
}

pub fn patch_dissimilarity(predicted: &Patch, truth: &Patch, metric: Metric, bins: usize) -> Result<f64> {
    match metric {
        Metric::Ssd => ssd(predicted, truth),
        Metric::Hi => patch_histogram_intersection(predicted, truth, bins),
    }
}

/// Mean of the per-voxel GP uncertainty over the patch lattice at `center`.
pub fn patch_uncertainty(model: &GpModel, vol: &Volume3D, center: Vec3, k: usize) -> Result<f64> {
    let lattice = vol.grid().patch_lattice(center, k)?;
    let preds = model.predict_many(&lattice);
    let sum: f64 = preds.iter().map(|p| p.u).sum();
    Ok(sum / preds.len() as f64)
}

/// Fits on `train` and, for every test landmark at `x`, compares the fixed
/// volume's patch at `x + d_g` with the one at `x + d_*`, and averages the
/// uncertainty over the lattice at `x + d_*`.
pub fn patchwise_experiment(
    train: &LandmarkSet,
    test: &LandmarkSet,
    fixed: &Volume3D,
    params: KernelParams,
    patch: PatchConfig,
) -> Result<AssociationReport> {
    if test.len() < 2 {
        return Err(Error::Degenerate(format!(
            "patch-wise experiment needs at least 2 test landmarks, got {}",
            test.len()
        )));
    }
    PatchConfig::new(patch.k, patch.metric, patch.bins)?;
    check_disjoint(train, test)?;
    let model = GpModel::fit(train, params)?;

    let mut records = Vec::with_capacity(test.len());
    let mut dropped = 0;
    for lm in sorted_test(test) {
        match patch_record(&model, fixed, lm.id, lm.x, lm.d, patch) {
            Ok(r) => records.push(r),
            Err(Error::OutOfBounds { .. }) => dropped += 1,
            Err(e) => return Err(e),
        }
    }
    if records.len() < 2 {
        return Err(Error::Degenerate(format!(
            "only {} usable patch records ({dropped} dropped out of bounds)",
            records.len()
        )));
    }
    let config = ExperimentConfig {
        kernel_a: params.a(),
        jitter: params.jitter(),
        patch: Some(patch),
    };
    AssociationReport::from_records(config, Records::Patch(records), dropped)
}

fn patch_record(
    model: &GpModel,
    fixed: &Volume3D,
    id: i64,
    x: Vec3,
    d_g: Vec3,
    cfg: PatchConfig,
) -> Result<PatchRecord> {
    let d_star = model.predict(x).mean;
    let predicted_center = add(x, d_star);
    let truth = fixed.extract_patch(add(x, d_g), cfg.k)?;
    let predicted = fixed.extract_patch(predicted_center, cfg.k)?;
    let eps_patch = patch_dissimilarity(&predicted, &truth, cfg.metric, cfg.bins)?;
    let u_patch = patch_uncertainty(model, fixed, predicted_center, cfg.k)?;
    Ok(PatchRecord {
        landmark_id: id,
        u_patch,
        eps_patch,
        metric: cfg.metric,
        k: cfg.k,
    })
}
