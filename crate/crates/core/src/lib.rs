//! Gaussian-process interpolation of sparse landmark displacements into dense
//! 3-D deformation fields with per-voxel uncertainty, plus the tooling to
//! measure how well that uncertainty ranks the true registration error.
//!
//! * [`field`]: volumes, landmarks, trilinear sampling and patch extraction.
//! * [`gp`]: the GP interpolator (posterior mean and marginal variance).
//! * [`rank`]: fractional ranks and Spearman's rho.
//! * [`assoc`]: point-wise and patch-wise uncertainty/error experiments.
//! * [`synth`]: synthetic phantoms with closed-form ground truth.
//! * [`io`]: file formats, reports, colour-mapped slices and config files.
//! * [`cli`]: the `regunc` command-line front end.

pub mod assoc;
pub mod cli;
pub mod error;
pub mod field;
pub mod gp;
pub mod io;
pub mod rank;
pub mod synth;

pub use assoc::{
    histogram_intersection, histogram_pmf, patch_uncertainty, patchwise_experiment, pointwise_error,
    pointwise_experiment, ssd, AssociationReport, Metric, PatchConfig, Rho,
};
pub use error::{Error, Result};
pub use field::{Grid, Landmark, LandmarkSet, Patch, Vec3, Volume3D};
pub use gp::{kernel_eval, DenseField, GpModel, KernelParams, Prediction};
pub use rank::{rank_vector, spearman_rho, RankVector};
pub use synth::{make_phantom, sample_landmarks, warp_volume, DeformationSpec, PhantomSpec};
