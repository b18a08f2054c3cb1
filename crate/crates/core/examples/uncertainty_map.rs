//! Dense displacement and uncertainty field, written as volumes plus a
//! colour-mapped slice (red = low uncertainty, blue = high).

use regunc::io::{render_uncertainty_slice, write_volume, Axis};
use regunc::synth::{sample_landmarks, DeformationSpec};
use regunc::{GpModel, Grid, KernelParams};

fn main() -> regunc::Result<()> {
    let out = std::env::temp_dir().join("regunc-uncertainty-map");
    std::fs::create_dir_all(&out)?;

    let grid = Grid::new([48, 48, 32], [1.0, 1.0, 1.5], [0.0; 3])?;
    let deformation = DeformationSpec::random(31, &grid, 3, 2.5)?;
    let (train, _) = sample_landmarks(&deformation, &grid, 40, 2, 32, 6)?;
    let model = GpModel::fit(&train, KernelParams::median_heuristic(&train.positions(), 1e-8)?)?;

    let field = model.dense_field_on(&grid, 2)?;
    let u = field.uncertainty();
    let (lo, hi) = u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    println!("{} field points, u in [{lo:.4}, {hi:.4}] mm", field.len());

    write_volume(out.join("u.uev"), &field.uncertainty_volume())?;
    let mid = field.grid().dims[2] / 2;
    std::fs::write(out.join("u_z.ppm"), render_uncertainty_slice(&field, Axis::Z, mid, lo, hi)?)?;
    println!("wrote {}", out.display());
    Ok(())
}
