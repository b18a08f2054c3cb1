//! Fit a GP to a handful of landmark displacements and query it.

use regunc::{GpModel, KernelParams, Landmark, LandmarkSet};

fn main() -> regunc::Result<()> {
    let landmarks = LandmarkSet::new(vec![
        Landmark::new(1, [10.0, 10.0, 10.0], [1.5, 0.0, -0.5]),
        Landmark::new(2, [30.0, 12.0, 8.0], [0.5, 1.0, 0.0]),
        Landmark::new(3, [20.0, 28.0, 15.0], [-1.0, 0.5, 0.5]),
        Landmark::new(4, [12.0, 25.0, 30.0], [0.0, -0.5, 1.0]),
    ])?;

    let params = KernelParams::median_heuristic(&landmarks.positions(), 1e-8)?;
    println!("kernel a = {:.2} mm^2", params.a());
    let model = GpModel::fit(&landmarks, params)?;

    // at a landmark, far away, and in between
    for q in [[10.0, 10.0, 10.0], [20.0, 18.0, 12.0], [200.0, 200.0, 200.0]] {
        let p = model.predict(q);
        println!(
            "x = {q:?}  d* = [{:+.3}, {:+.3}, {:+.3}]  u = {:.4}",
            p.mean[0], p.mean[1], p.mean[2], p.u
        );
    }
    Ok(())
}
