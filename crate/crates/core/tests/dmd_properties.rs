mod common;

use cdmd_core::diagnostics::{eigenvalue_distance, l1_bound_check, mass_series, nonnegativity_horizon};
use cdmd_core::{
    extract_compartment, fit, fit_uncoupled, reconstruct_continuous, reconstruct_discrete, split_pair, stack_coupled,
    Backend, CompartmentLayout, Matrix, SnapshotMatrix,
};
use common::{column_sums, iterate, markov, seeded_generator, snapshots};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn split_pair_overlaps_by_one_column() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let data = Matrix::from_fn(4, 11, |_, _| rng.gen_range(-1.0..1.0));
    let y = snapshots(data.clone(), "a:2,b:2");
    let (y1, y2) = split_pair(&y).unwrap();
    assert_eq!(y1.shape(), (4, 10));
    assert_eq!(y2.shape(), (4, 10));
    assert_eq!(y1.column_range(1, 10), y2.column_range(0, 9));
    assert_eq!(y1, data.column_range(0, 10));
    assert_eq!(y2, data.column_range(1, 11));
}

/// Two compartments of two nodes exchanging mass on a rotation; every column
/// sums to 4 but neither compartment is conserved.
fn exchange_system(cols: usize) -> SnapshotMatrix {
    let theta: f64 = 0.4;
    let data = Matrix::from_fn(4, cols, |i, k| {
        let (c, s) = ((theta * k as f64).cos(), (theta * k as f64).sin());
        match i {
            0 => 1.0 + 0.5 * c,
            1 => 1.0 + 0.3 * s,
            2 => 1.0 - 0.5 * c,
            _ => 1.0 - 0.3 * s,
        }
    });
    snapshots(data, "a:2,b:2")
}

#[test]
fn uncoupled_fits_break_conservation_on_exchange_system() {
    let y = exchange_system(30);
    let all = [0, 1];

    let coupled = fit(&y, 4, Backend::Exact).unwrap();
    let rec = coupled.reconstruct_snapshots(30).unwrap();
    let coupled_mass = mass_series(&rec, &all).unwrap();
    assert!(coupled_mass.iter().all(|m| (m - 4.0).abs() <= 1e-8 * 4.0));

    let models = fit_uncoupled(&y.split_compartments(), 2, Backend::Exact).unwrap();
    let parts: Vec<SnapshotMatrix> = models.iter().map(|m| m.reconstruct_snapshots(30).unwrap()).collect();
    let unc = stack_coupled(&parts).unwrap();
    let mass = mass_series(&unc, &all).unwrap();
    let drift = mass.iter().map(|m| (m - 4.0).abs() / 4.0).fold(0.0, f64::max);
    assert!(drift > 1e-3, "{drift}");
}

#[test]
fn augmented_observables_keep_subset_conserved() {
    // Markov exchange on a:3,b:3 plus a block of squared `a` values.
    let a = markov(6, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let u0: Vec<f64> = (0..6).map(|_| rng.gen_range(0.2..2.0)).collect();
    let base = iterate(&a, u0, 30);
    let squares = Matrix::from_fn(3, 30, |i, j| base[(i, j)].powi(2));
    let data = Matrix::vstack(&[&base, &squares]).unwrap();
    let y = snapshots(data, "a:3,b:3,sq:3");
    let model = fit(&y, 9, Backend::Exact).unwrap();
    let rec = model.reconstruct_snapshots(60).unwrap();
    let c = mass_series(&y, &[0, 1]).unwrap()[0];
    for m in mass_series(&rec, &[0, 1]).unwrap() {
        assert!((m - c).abs() <= 1e-8 * c, "{m} vs {c}");
    }
}

#[test]
fn block_permutation_permutes_modes() {
    let a = markov(6, 17);
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let u0: Vec<f64> = (0..6).map(|_| rng.gen_range(0.2..2.0)).collect();
    let y = snapshots(iterate(&a, u0, 12), "x:2,y:2,z:2");
    let perm = [2, 0, 1];
    let yp = y.permute_compartments(&perm).unwrap();
    let m = fit(&y, 6, Backend::Exact).unwrap();
    let mp = fit(&yp, 6, Backend::Exact).unwrap();
    assert!(eigenvalue_distance(&m.lambda, &mp.lambda).unwrap() <= 1e-9);

    let rows: Vec<usize> = perm.iter().flat_map(|&c| y.layout().block(c)).collect();
    for (j, lam) in m.lambda.iter().enumerate() {
        let jp = (0..mp.rank)
            .min_by(|&p, &q| (mp.lambda[p] - lam).norm().total_cmp(&(mp.lambda[q] - lam).norm()))
            .unwrap();
        let moved = m.psi.permute_rows(&rows).column(j);
        let other = mp.psi.column(jp);
        let inner: Complex64 = moved.iter().zip(&other).map(|(x, y)| x.conj() * y).sum();
        let norms = moved.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
            * other.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!(inner.norm() >= (1.0 - 1e-9) * norms, "mode {j} not aligned");
    }
}

#[test]
fn growing_oscillation_has_a_finite_nonnegativity_horizon() {
    // A complex pair with modulus 1.05 on top of a constant level: positive
    // over the training window, negative once the swing exceeds the level.
    let r: f64 = 1.05;
    let theta: f64 = 0.5;
    let data = Matrix::from_fn(2, 12, |i, k| {
        let phase = theta * k as f64 + i as f64;
        3.0 + 0.5 * r.powi(k as i32) * phase.cos()
    });
    let constant = Matrix::from_fn(1, 12, |_, _| 1.0);
    let y = snapshots(Matrix::vstack(&[&data, &constant]).unwrap(), "u:3");
    let model = fit(&y, 3, Backend::Exact).unwrap();
    let rec = model.reconstruct_snapshots(80).unwrap();
    assert_eq!(nonnegativity_horizon(&y), None);
    let horizon = nonnegativity_horizon(&rec).expect("goes negative");
    assert!(horizon > 12 && horizon < 80, "{horizon}");
    // Past the horizon the L¹ bound no longer has its hypothesis.
    assert!(!l1_bound_check(&rec, &rec, &[0]).unwrap().applicable);
}

fn small_generator() -> impl Strategy<Value = (usize, u64)> {
    (1usize..=8, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_recovery_of_generator_spectrum((n, seed) in small_generator(), extra in 1usize..4) {
        let (a, spectrum) = seeded_generator(n, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let u0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
        let y = snapshots(iterate(&a, u0, n + extra + 1), &format!("u:{n}"));
        let model = fit(&y, n, Backend::Exact).unwrap();
        prop_assert!(eigenvalue_distance(&model.lambda, &spectrum).unwrap() <= 1e-8);
    }

    #[test]
    fn stochastic_snapshots_are_conserved_over_twice_the_window(n in 2usize..8, seed in any::<u64>()) {
        let a = markov(n, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let u0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..3.0)).collect();
        let m = n + 3;
        let data = iterate(&a, u0, m);
        let c = column_sums(&data)[0];
        let model = fit(&snapshots(data, &format!("u:{n}")), n, Backend::Exact).unwrap();
        for k in 0..=2 * m {
            let s: f64 = reconstruct_discrete(&model, k).state.iter().sum();
            prop_assert!((s - c).abs() <= 1e-8 * c, "k={} sum {} vs {}", k, s, c);
        }
    }

    #[test]
    fn continuous_and_discrete_agree_on_the_grid((n, seed) in small_generator(), k in 0usize..20) {
        // Even sizes only carry complex pairs, so nothing sits on the negative axis.
        let n = 2 * n.div_ceil(2);
        let (a, _) = seeded_generator(n, seed);
        let y = snapshots(iterate(&a, vec![1.0; n], n + 3), &format!("u:{n}"));
        let model = fit(&y, n, Backend::Exact).unwrap();
        let d = reconstruct_discrete(&model, k).state;
        let c = reconstruct_continuous(&model, k as f64 * model.dt).unwrap().state;
        let scale = d.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (x, z) in d.iter().zip(&c) {
            prop_assert!((x - z).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn stack_then_extract_round_trips(nodes in 1usize..5, parts in 1usize..5, cols in 1usize..6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pieces: Vec<SnapshotMatrix> = (0..parts)
            .map(|p| {
                let data = Matrix::from_fn(nodes, cols, |_, _| rng.gen_range(-5.0..5.0));
                let layout = CompartmentLayout::single(&format!("c{p}"), nodes).unwrap();
                SnapshotMatrix::new(data, 0.5, layout, 2.0).unwrap()
            })
            .collect();
        let stacked = stack_coupled(&pieces).unwrap();
        prop_assert_eq!(stacked.layout().compartments(), parts);
        for j in 0..cols {
            let column = stacked.column(j);
            for (p, piece) in pieces.iter().enumerate() {
                prop_assert_eq!(extract_compartment(&column, stacked.layout(), p).unwrap(), piece.column(j));
            }
        }
        prop_assert_eq!(stacked.split_compartments(), pieces);
    }
}
