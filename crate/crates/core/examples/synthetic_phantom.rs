//! Generate a blob phantom, warp it with a known smooth deformation and draw
//! ground-truth landmarks.

use regunc::synth::{make_phantom, sample_landmarks, warp_volume, DeformationSpec, PhantomSpec};

fn main() -> regunc::Result<()> {
    let spec = PhantomSpec { seed: 11, dims: [48, 48, 48], spacing: [1.0; 3], blob_count: 16, noise_sigma: 0.01 };
    let fixed = make_phantom(&spec)?;
    let (lo, hi) = fixed.voxels().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    println!("phantom {:?}, intensity in [{lo:.3}, {hi:.3}]", fixed.dims());

    let deformation = DeformationSpec::random(12, fixed.grid(), 4, 3.0)?;
    for b in deformation.bumps() {
        println!("bump at {:?} width {:.1} mm", b.center.map(|c| c.round()), b.width);
    }
    let moving = warp_volume(&fixed, &deformation);
    println!("warp left {:.2}% of voxels outside the fixed volume", 100.0 * moving.out_of_bounds_fraction);

    let (train, test) = sample_landmarks(&deformation, fixed.grid(), 50, 20, 13, 8)?;
    let first = &test.landmarks()[0];
    println!("{} train / {} test landmarks; test id {} at {:?} moves by {:?}", train.len(), test.len(), first.id, first.x, first.d);
    Ok(())
}
