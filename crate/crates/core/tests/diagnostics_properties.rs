mod common;

use cdmd_core::diagnostics::{l1_bound_check, mass_series, permutation_spectrum_test, relative_l2_series};
use cdmd_core::io::{model_from_str, model_to_string, snapshots_from_str, snapshots_to_string, SnapshotFile};
use cdmd_core::linalg::svd;
use cdmd_core::{fit, Backend, CompartmentLayout, Matrix, SnapshotMatrix};
use common::{iterate, markov, snapshots};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn layout_and_data() -> impl Strategy<Value = SnapshotMatrix> {
    (1usize..4, 1usize..5, 1usize..8, any::<u64>()).prop_map(|(parts, nodes, cols, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let names: Vec<String> = (0..parts).map(|p| format!("c{p}")).collect();
        let layout = CompartmentLayout::new(names, nodes).unwrap();
        let data = Matrix::from_fn(parts * nodes, cols, |_, _| rng.gen_range(0.0..10.0));
        SnapshotMatrix::new(data, 0.1, layout, rng.gen_range(0.01..2.0)).unwrap()
    })
}

fn scaled(y: &SnapshotMatrix, mut f: impl FnMut(usize, usize, f64) -> f64) -> SnapshotMatrix {
    let d = y.data();
    let data = Matrix::from_fn(d.rows(), d.cols(), |i, j| f(i, j, d[(i, j)]));
    SnapshotMatrix::new(data, y.dt(), y.layout().clone(), y.cell_weight()).unwrap()
}

fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let m = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let f = svd(&m).unwrap();
    f.u.matmul(&f.v.transpose())
}

#[test]
fn permutation_distance_is_symmetric_under_inversion() {
    let a = markov(6, 3);
    let y = snapshots(iterate(&a, vec![1.0, 2.0, 0.5, 1.5, 0.7, 1.1], 12), "x:2,y:2,z:2");
    let perm = [1, 2, 0];
    let inverse = [2, 0, 1];
    let forward = permutation_spectrum_test(&y, &perm, 6).unwrap();
    let back = permutation_spectrum_test(&y.permute_compartments(&perm).unwrap(), &inverse, 6).unwrap();
    assert!(forward <= 1e-9 && back <= 1e-9);
    assert!((forward - back).abs() <= 1e-12, "{forward} vs {back}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mass_is_linear_in_the_data(y in layout_and_data(), alpha in 0.0f64..100.0) {
        let all: Vec<usize> = (0..y.layout().compartments()).collect();
        let base = mass_series(&y, &all).unwrap();
        let scaled_mass = mass_series(&scaled(&y, |_, _, v| alpha * v), &all).unwrap();
        for (a, b) in base.iter().zip(&scaled_mass) {
            prop_assert!((alpha * a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn l2_error_is_rotation_invariant_within_a_block(y in layout_and_data(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rec = scaled(&y, |_, _, v| v + rng.gen_range(-1.0..1.0));
        let nodes = y.layout().node_count();
        let q = random_orthogonal(nodes, &mut rng);
        let rotate = |s: &SnapshotMatrix| {
            let block = s.compartment_block(0).unwrap();
            let turned = q.matmul(&block);
            scaled(s, |i, j, v| if i < nodes { turned[(i, j)] } else { v })
        };
        let before = relative_l2_series(&y, &rec, 0).unwrap();
        let after = relative_l2_series(&rotate(&y), &rotate(&rec), 0).unwrap();
        for (a, b) in before.values.iter().zip(&after.values) {
            prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0));
        }
    }

    #[test]
    fn l1_bound_holds_for_nonnegative_equal_mass_data(y in layout_and_data(), seed in any::<u64>()) {
        // A constant reference, and a reconstruction that spreads the same
        // total over the entries at random: both non-negative, equal mass.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reference = scaled(&y, |i, _, _| y.data()[(i, 0)]);
        let total: f64 = y.data().column(0).iter().sum();
        let rows = y.data().rows();
        let mut rec = Matrix::zeros(rows, y.columns());
        for j in 0..y.columns() {
            let w: Vec<f64> = (0..rows).map(|_| rng.gen_range(0.0..1.0)).collect();
            let wsum: f64 = w.iter().sum::<f64>().max(f64::MIN_POSITIVE);
            rec.set_column(j, &w.iter().map(|x| total * x / wsum).collect::<Vec<_>>());
        }
        let rec = SnapshotMatrix::new(rec, y.dt(), y.layout().clone(), y.cell_weight()).unwrap();
        let all: Vec<usize> = (0..y.layout().compartments()).collect();
        let check = l1_bound_check(&reference, &rec, &all).unwrap();
        prop_assert!(check.applicable);
        prop_assert!(check.satisfied, "{} > {}", check.max_lhs(), check.bound);
    }

    #[test]
    fn snapshot_text_round_trips_exactly(y in layout_and_data(), t0 in 0.0f64..1e3, exp in -300i32..300) {
        let y = scaled(&y, |_, _, v| v * 10f64.powi(exp) - 1.0);
        let mut file = SnapshotFile::new(y);
        file.t0 = t0;
        file.extrapolated = Some((0..file.snapshots.columns()).map(|j| j % 2 == 1).collect());
        let back = snapshots_from_str(&snapshots_to_string(&file)).unwrap();
        prop_assert_eq!(back, file);
    }

    #[test]
    fn model_text_round_trips_exactly(n in 2usize..7, seed in any::<u64>()) {
        let a = markov(n, seed);
        let y = snapshots(iterate(&a, (0..n).map(|i| 1.0 + i as f64).collect(), n + 2), &format!("u:{n}"));
        let mut model = fit(&y, n, Backend::Exact).unwrap();
        model.fit_details = None;
        let back = model_from_str(&model_to_string(&model).unwrap()).unwrap();
        prop_assert_eq!(back, model);
    }
}
