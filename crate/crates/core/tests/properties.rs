use std::sync::Arc;

use proptest::prelude::*;

use afqms_core::algebra::spectral::{Dense, SpectralNorm};
use afqms_core::algebra::{stream_rng, unit_disc, CMatrix, Kernel, KernelSampler, Measure};
use afqms_core::format::{kernel_from_json, kernel_to_json, measure_from_json, measure_to_json};
use afqms_core::oracle;
use afqms_core::quantum_metric::{beta_partial, lipschitz_seminorm, Stratification};
use afqms_core::transport::{wasserstein_lp, wasserstein_tree, CylinderTree};
use afqms_core::{BrattelDiagram, TruncatedGroupoid, UnitUltrametric};

fn diagrams() -> Vec<Arc<TruncatedGroupoid>> {
    let two_sources = BrattelDiagram::new(
        vec![2, 2, 2, 2],
        vec![vec![vec![1, 1], vec![0, 1]], vec![vec![1, 1], vec![1, 1]], vec![vec![2, 0], vec![1, 1]]],
        None,
    )
    .unwrap();
    vec![
        Arc::new(TruncatedGroupoid::new(BrattelDiagram::car(3), 3, UnitUltrametric::default()).unwrap()),
        Arc::new(
            TruncatedGroupoid::new(
                BrattelDiagram::stationary(&[vec![1, 1], vec![1, 1]], 3),
                2,
                UnitUltrametric::new(0.3).unwrap(),
            )
            .unwrap(),
        ),
        Arc::new(TruncatedGroupoid::new(two_sources, 3, UnitUltrametric::new(0.7).unwrap()).unwrap()),
    ]
}

fn kernel(g: &Arc<TruncatedGroupoid>, level: usize, seed: u64) -> Kernel {
    KernelSampler::new(level % (g.resolution() + 1))
        .sample(g, &mut stream_rng(seed, 0))
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lipschitz_matches_all_pairs(which in 0usize..3, level in 0usize..4, seed in any::<u64>()) {
        let g = &diagrams()[which];
        let f = kernel(g, level, seed);
        let s = Stratification::new(g);
        prop_assert_eq!(lipschitz_seminorm(&f, &s), oracle::lipschitz_by_pairs(&f));
    }

    #[test]
    fn convolution_matches_sum(which in 0usize..3, a in 0usize..4, b in 0usize..4, seed in any::<u64>()) {
        let g = &diagrams()[which];
        let f = kernel(g, a, seed);
        let h = kernel(g, b, seed ^ 1);
        let fh = f.convolve(&h).unwrap();
        for ((x, y), v) in oracle::convolution_by_sum(&f, &h) {
            prop_assert!((fh.get(x, y) - v).norm() <= 1e-12);
        }
    }

    #[test]
    fn op_norm_matches_svd(which in 0usize..3, level in 0usize..4, seed in any::<u64>()) {
        let g = &diagrams()[which];
        let f = kernel(g, level, seed);
        let svd = oracle::op_norm_svd(&f);
        prop_assert!((f.op_norm().unwrap() - svd).abs() <= 1e-12 * svd.max(1.0));
    }

    #[test]
    fn dense_norm_is_sign_and_adjoint_invariant(rows in 1usize..9, cols in 1usize..9, seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 0);
        let m = CMatrix::from_fn(rows, cols, |_, _| unit_disc(&mut rng));
        let v = Dense.norm(&m).unwrap();
        prop_assert_eq!(v, Dense.norm(&m.adjoint()).unwrap());
        prop_assert_eq!(v, Dense.norm(&(-m.clone())).unwrap());
        prop_assert_eq!(v, Dense.norm(&(-m.adjoint())).unwrap());
    }

    #[test]
    fn tree_is_the_ultrametric_and_agrees_with_lp(which in 0usize..3, seed in any::<u64>()) {
        let g = &diagrams()[which];
        let tree = CylinderTree::new(g);
        for p in 0..g.num_paths() {
            for q in 0..g.num_paths() {
                let expect = oracle::ultra_distance(g, g.path(p), g.path(q));
                prop_assert!((tree.distance(p, q) - expect).abs() <= 1e-15);
            }
        }
        let a = Measure::random(g, &mut stream_rng(seed, 1));
        let b = Measure::random(g, &mut stream_rng(seed, 2));
        let c = Measure::random(g, &mut stream_rng(seed, 3));
        let ab = wasserstein_tree(g, &a, &b).unwrap();
        prop_assert!((ab - wasserstein_tree(g, &b, &a).unwrap()).abs() <= 1e-15);
        prop_assert!(ab <= wasserstein_tree(g, &a, &c).unwrap() + wasserstein_tree(g, &c, &b).unwrap() + 1e-15);
        prop_assert!((ab - wasserstein_lp(g, &a, &b, 512).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn json_round_trips_bit_exactly(which in 0usize..3, level in 0usize..4, seed in any::<u64>()) {
        let g = &diagrams()[which];
        let f = kernel(g, level, seed);
        let back = kernel_from_json(g, &kernel_to_json(&f)).unwrap();
        for (x, y, v) in f.entries() {
            let w = back.get(x, y);
            prop_assert_eq!((v.re.to_bits(), v.im.to_bits()), (w.re.to_bits(), w.im.to_bits()));
        }
        let mu = Measure::random(g, &mut stream_rng(seed, 9));
        let nu = measure_from_json(g, &measure_to_json(g, &mu)).unwrap();
        prop_assert_eq!(mu.weights(), nu.weights());
    }
}

#[test]
fn groupoid_matches_enumeration_oracle() {
    for g in diagrams() {
        let paths = oracle::enumerate_paths(g.diagram(), g.resolution());
        assert_eq!(paths.len(), g.num_paths());
        let lengths = oracle::length_matrix(&g);
        for (x, row) in lengths.iter().enumerate() {
            for (y, &l) in row.iter().enumerate() {
                if g.terminal(x) == g.terminal(y) {
                    assert_eq!(l, g.length(x, y) as f64);
                } else {
                    assert!(l.is_nan());
                }
            }
        }
    }
}

// Frozen from the enumeration oracle.
#[test]
fn frozen_beta_values() {
    let car = oracle::beta_by_enumeration(&BrattelDiagram::car(8), 8);
    for (m, b) in car.iter().enumerate() {
        assert_eq!(*b, 0.5f64.powi(m as i32 + 1) - 0.5f64.powi(9));
    }
    let full2 = oracle::beta_by_enumeration(&BrattelDiagram::stationary(&[vec![1, 1], vec![1, 1]], 6), 6);
    let frozen = FULL2_BETA;
    for (m, (x, y)) in full2.iter().zip(frozen).enumerate() {
        assert!((x - y).abs() <= 1e-15, "m = {m}: {x} vs {y}");
    }
    let d = BrattelDiagram::stationary(&[vec![1, 1], vec![1, 1]], 6);
    for (m, y) in frozen.iter().enumerate() {
        assert!((beta_partial(&d, &d.path_counts(), m, 6) - y).abs() <= 1e-15);
    }
}

const FULL2_BETA: [f64; 7] = [0.123046875, 0.060546875, 0.029296875, 0.013671875, 0.005859375, 0.001953125, 0.0];
