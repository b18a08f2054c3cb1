use proptest::prelude::*;
use regunc::io::landmark_csv::write_landmarks_voxel;
use regunc::io::{decode_volume, encode_volume, parse_landmarks, render_uncertainty_slice, write_landmarks, Axis};
use regunc::{GpModel, Grid, KernelParams, Landmark, LandmarkSet, Volume3D};

fn volume() -> impl Strategy<Value = Volume3D> {
    ([1usize..6, 1usize..6, 1usize..6], [0.1..3.0f64, 0.1..3.0f64, 0.1..3.0f64], [-50.0..50.0f64, -50.0..50.0f64, -50.0..50.0f64])
        .prop_flat_map(|(dims, spacing, origin)| {
            let n = dims[0] * dims[1] * dims[2];
            prop::collection::vec(-1e6..1e6f64, n).prop_map(move |v| {
                Volume3D::new(Grid::new(dims, spacing, origin).unwrap(), v).unwrap()
            })
        })
}

fn landmarks() -> impl Strategy<Value = LandmarkSet> {
    prop::collection::vec(([-100.0..100.0f64, -100.0..100.0f64, -100.0..100.0f64], [-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64]), 1..20)
        .prop_map(|v| {
            let mut seen = Vec::new();
            let lms = v
                .into_iter()
                .enumerate()
                .filter(|(_, (x, _))| {
                    let fresh = !seen.contains(x);
                    seen.push(*x);
                    fresh
                })
                .map(|(i, (x, d))| Landmark::new(i as i64 * 3 - 7, x, d))
                .collect();
            LandmarkSet::new(lms).unwrap()
        })
}

proptest! {
    #[test]
    fn volume_file_is_bit_exact(v in volume()) {
        let bytes = encode_volume(&v);
        prop_assert_eq!(bytes.len(), 40 + 4 * v.grid().len());
        let back = decode_volume(&bytes).unwrap();
        prop_assert_eq!(encode_volume(&back), bytes);
        prop_assert_eq!(back.dims(), v.dims());
        for (a, b) in back.voxels().iter().zip(v.voxels()) {
            prop_assert_eq!(*a, *b as f32 as f64);
        }
    }

    #[test]
    fn landmark_csv_round_trips(set in landmarks()) {
        prop_assert_eq!(parse_landmarks(&write_landmarks(&set), None).unwrap(), set.clone());

        let grid = Grid::new([10, 10, 10], [0.7, 1.3, 2.2], [-3.0, 4.5, 0.1]).unwrap();
        let back = parse_landmarks(&write_landmarks_voxel(&set, &grid), Some(&grid)).unwrap();
        for (a, b) in back.iter().zip(set.iter()) {
            prop_assert_eq!(a.id, b.id);
            for c in 0..3 {
                prop_assert!((a.x[c] - b.x[c]).abs() <= 1e-12 * b.x[c].abs().max(1.0));
                prop_assert!((a.d[c] - b.d[c]).abs() <= 1e-12 * b.d[c].abs().max(1.0));
            }
        }
    }
}

#[test]
fn rendering_is_deterministic_and_red_at_minimum() {
    let lms = LandmarkSet::new(vec![
        Landmark::new(0, [2.0, 2.0, 2.0], [1.0, 0.0, 0.0]),
        Landmark::new(1, [6.0, 5.0, 2.0], [0.0, 1.0, 0.0]),
    ])
    .unwrap();
    let model = GpModel::fit(&lms, KernelParams::new(4.0, 0.0).unwrap()).unwrap();
    let grid = Grid::new([9, 8, 5], [1.0; 3], [0.0; 3]).unwrap();
    let field = model.dense_field_on(&grid, 1).unwrap();
    let u_min = field.uncertainty().iter().cloned().fold(f64::INFINITY, f64::min);
    let a = render_uncertainty_slice(&field, Axis::Z, 2, u_min, 3f64.sqrt()).unwrap();
    let b = render_uncertainty_slice(&field, Axis::Z, 2, u_min, 3f64.sqrt()).unwrap();
    assert_eq!(a, b);
    // the landmark at voxel (2, 2, 2) carries the minimum uncertainty
    let header = b"P6\n9 8\n255\n".len();
    let px = &a[header + 3 * (2 * 9 + 2)..][..3];
    assert_eq!(px, [255, 0, 0]);
}
