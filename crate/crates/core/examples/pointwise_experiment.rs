//! Point-wise association between GP uncertainty and landmark error on a
//! synthetic deformation.

use regunc::assoc::Records;
use regunc::io::report::report_to_json;
use regunc::synth::{sample_landmarks, DeformationSpec};
use regunc::{pointwise_experiment, Grid, KernelParams};

fn main() -> regunc::Result<()> {
    let grid = Grid::new([64, 64, 64], [1.0; 3], [0.0; 3])?;
    let deformation = DeformationSpec::random(5, &grid, 4, 3.0)?;
    let (train, test) = sample_landmarks(&deformation, &grid, 100, 100, 6, 12)?;

    let params = KernelParams::median_heuristic(&train.positions(), 1e-8)?;
    let report = pointwise_experiment(&train, &test, params)?;
    println!("M = {}, rho_s = {:?}", report.m(), report.rho);

    if let Records::Point(records) = &report.records {
        let worst = records.iter().max_by(|a, b| a.eps.total_cmp(&b.eps)).unwrap();
        println!("largest error: landmark {} eps = {:.3} mm, u = {:.3} mm", worst.landmark_id, worst.eps, worst.u);
    }
    let json = report_to_json(&report);
    println!("{}", json.lines().take(12).collect::<Vec<_>>().join("\n"));
    Ok(())
}
