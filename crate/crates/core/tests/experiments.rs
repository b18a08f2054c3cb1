mod common;

use regunc::assoc::{Records, DEFAULT_BINS};
use regunc::field::{add, scale};
use regunc::synth::{sample_landmarks, DeformationSpec};
use regunc::{
    patch_uncertainty, patchwise_experiment, pointwise_experiment, GpModel, KernelParams, Landmark, LandmarkSet,
    Metric, PatchConfig, Rho,
};

fn case(seed: u64) -> (LandmarkSet, LandmarkSet, regunc::Volume3D) {
    let vol = common::ramp_volume(48);
    let def = DeformationSpec::random(seed, vol.grid(), 3, 3.0).unwrap();
    let (train, test) = sample_landmarks(&def, vol.grid(), 40, 40, seed + 1, 10).unwrap();
    (train, test, vol)
}

#[test]
fn pointwise_monotone_construction_gives_unit_rho() {
    let (train, test, _) = case(1);
    let params = KernelParams::new(50.0, 1e-8).unwrap();
    let model = GpModel::fit(&train, params).unwrap();
    let dir = [1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0];
    let constructed: Vec<Landmark> = test
        .iter()
        .map(|lm| {
            let p = model.predict(lm.x);
            Landmark::new(lm.id, lm.x, add(p.mean, scale(dir, 0.5 * p.u)))
        })
        .collect();
    let report = pointwise_experiment(&train, &LandmarkSet::new(constructed).unwrap(), params).unwrap();
    assert_eq!(report.m(), 40);
    assert_eq!(report.rho().unwrap(), 1.0);
}

#[test]
fn patchwise_monotone_construction_gives_unit_rho() {
    let (train, test, vol) = case(2);
    let params = KernelParams::new(50.0, 1e-8).unwrap();
    let model = GpModel::fit(&train, params).unwrap();
    let constructed: Vec<Landmark> = test
        .iter()
        .map(|lm| {
            let d_star = model.predict(lm.x).mean;
            let u = patch_uncertainty(&model, &vol, add(lm.x, d_star), 3).unwrap();
            Landmark::new(lm.id, lm.x, add(d_star, [0.5 * u, 0.0, 0.0]))
        })
        .collect();
    let cfg = PatchConfig::new(3, Metric::Ssd, DEFAULT_BINS).unwrap();
    let report = patchwise_experiment(&train, &LandmarkSet::new(constructed).unwrap(), &vol, params, cfg).unwrap();
    assert_eq!(report.dropped, 0);
    assert_eq!(report.rho().unwrap(), 1.0);
}

#[test]
fn reports_are_deterministic() {
    let (train, test, vol) = case(3);
    let params = KernelParams::median_heuristic(&train.positions(), 1e-8).unwrap();
    assert_eq!(
        pointwise_experiment(&train, &test, params).unwrap(),
        pointwise_experiment(&train, &test, params).unwrap()
    );
    for metric in [Metric::Ssd, Metric::Hi] {
        let cfg = PatchConfig::new(5, metric, DEFAULT_BINS).unwrap();
        let a = patchwise_experiment(&train, &test, &vol, params, cfg).unwrap();
        let b = patchwise_experiment(&train, &test, &vol, params, cfg).unwrap();
        assert_eq!(a, b);
        assert!(matches!(a.rho, Rho::Value(v) if (-1.0..=1.0).contains(&v)));
    }
}

#[test]
fn point_records_are_in_id_order_and_non_negative() {
    let (train, test, _) = case(4);
    let mut shuffled = test.landmarks().to_vec();
    shuffled.reverse();
    let report =
        pointwise_experiment(&train, &LandmarkSet::new(shuffled).unwrap(), KernelParams::new(60.0, 1e-8).unwrap())
            .unwrap();
    let Records::Point(recs) = &report.records else { panic!("point records expected") };
    assert!(recs.windows(2).all(|w| w[0].landmark_id < w[1].landmark_id));
    assert!(recs.iter().all(|r| r.u >= 0.0 && r.eps >= 0.0));
}

#[test]
fn exact_ground_truth_gives_zero_error() {
    let (train, test, _) = case(5);
    let params = KernelParams::new(50.0, 1e-8).unwrap();
    let model = GpModel::fit(&train, params).unwrap();
    let exact: Vec<Landmark> = test.iter().map(|lm| Landmark::new(lm.id, lm.x, model.predict(lm.x).mean)).collect();
    let report = pointwise_experiment(&train, &LandmarkSet::new(exact).unwrap(), params).unwrap();
    assert_eq!(report.rho, Rho::Degenerate);
}
