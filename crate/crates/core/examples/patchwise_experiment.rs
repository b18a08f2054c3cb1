//! Patch-wise association: average uncertainty over a patch against the
//! intensity dissimilarity of predicted and true patches, for SSD and HI.

use regunc::assoc::DEFAULT_BINS;
use regunc::synth::{make_phantom, sample_landmarks, DeformationSpec, PhantomSpec};
use regunc::{patchwise_experiment, KernelParams, Metric, PatchConfig};

fn main() -> regunc::Result<()> {
    let spec = PhantomSpec { seed: 21, dims: [64, 64, 64], spacing: [1.0; 3], blob_count: 24, noise_sigma: 0.0 };
    let fixed = make_phantom(&spec)?;
    let deformation = DeformationSpec::random(22, fixed.grid(), 4, 3.0)?;
    let (train, test) = sample_landmarks(&deformation, fixed.grid(), 100, 100, 23, 12)?;
    let params = KernelParams::median_heuristic(&train.positions(), 1e-8)?;

    for k in [3, 5] {
        for metric in [Metric::Ssd, Metric::Hi] {
            let cfg = PatchConfig::new(k, metric, DEFAULT_BINS)?;
            let report = patchwise_experiment(&train, &test, &fixed, params, cfg)?;
            println!("k = {k} {metric:>3}: M = {:3} dropped = {} rho_s = {:?}", report.m(), report.dropped, report.rho);
        }
    }
    Ok(())
}
