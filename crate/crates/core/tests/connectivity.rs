use std::f64::consts::PI;

use graphvariate::connectivity::{
    correlation_matrix, gvd, modular_connectivity, pli_matrix, windowed_gvd, GvdDelta, WindowScheme,
};
use graphvariate::experiments::{ar2_generate_with, rng::stream, ArModel};
use graphvariate::stats::binomial_two_sided;
use graphvariate::{GraphKind, MultivariateSignal, NodeFunction, NodeFunctionKind, WeightedGraph};
use ndarray::{array, Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn random_signal(rng: &mut ChaCha8Rng, n: usize, p: usize) -> MultivariateSignal {
    MultivariateSignal::new(Array2::from_shape_simple_fn((n, p), || StandardNormal.sample(rng)), 100.0).unwrap()
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> WeightedGraph {
    let mut w = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.random_range(-1.0..1.0);
            w[[i, j]] = v;
            w[[j, i]] = v;
        }
    }
    WeightedGraph::new(w, GraphKind::Generic).unwrap()
}

fn random_phase(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, p), || rng.random_range(-PI..PI))
}

/// x₁ = ½(z₁ + z₂), x₂ = ½(z₁ + z₃), x₃ = ½(z₄ + z₅) from five AR(2) realisations.
fn three_node_example(seed: u64) -> MultivariateSignal {
    let model = ArModel::default();
    let mut rng = stream(seed, &[]);
    let z: Vec<Vec<f64>> = (0..5).map(|_| ar2_generate_with(&model, 1000, &mut rng)).collect();
    let mix = [(0, 1), (0, 2), (3, 4)];
    let data = Array2::from_shape_fn((3, 1000), |(i, t)| 0.5 * (z[mix[i].0][t] + z[mix[i].1][t]));
    MultivariateSignal::new(data, 1.0).unwrap()
}

#[test]
fn shared_realisation_correlation_is_one_half_on_average() {
    let seeds = 1000;
    let total: f64 = (0..seeds)
        .map(|s| correlation_matrix(&three_node_example(s), 0..1000).unwrap().graph.weight(0, 1))
        .sum();
    let mean = total / seeds as f64;
    assert!((0.40..=0.60).contains(&mean), "{mean}");
}

#[test]
fn long_term_weights_emphasise_the_correlated_edge() {
    let w = array![[0.0, 0.6934, -0.0576], [0.6934, 0.0, 0.0943], [-0.0576, 0.0943, 0.0]];
    let graph = WeightedGraph::new(w, GraphKind::Correlation).unwrap();
    for seed in 0..20 {
        let s = three_node_example(seed);
        let r = gvd(&s, &graph, &NodeFunction::instantaneous_correlation(&s, 0, 1000)).unwrap();
        let mean_abs: Vec<f64> = r.node_values.rows().into_iter().map(|row| row.mapv(f64::abs).mean().unwrap()).collect();
        assert!(mean_abs[2] < mean_abs[0] && mean_abs[2] < mean_abs[1], "seed {seed}: {mean_abs:?}");
    }
}

#[test]
fn gvd_matches_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s = random_signal(&mut rng, 7, 40);
    let g = random_graph(&mut rng, 7);
    let means: Array1<f64> = s.data().rows().into_iter().map(|r| r.mean().unwrap()).collect();
    let f = NodeFunction::InstantaneousCorrelation { means: means.clone() };
    let r = gvd(&s, &g, &f).unwrap();
    let x = s.data();
    for i in 0..7 {
        for t in 0..40 {
            let mut acc = 0.0;
            for j in 0..7 {
                if j != i {
                    acc += g.weight(i, j) * ((x[[i, t]] - means[i]) * (x[[j, t]] - means[j])).abs();
                }
            }
            assert!((r.node_values[[i, t]] - acc).abs() <= 1e-10);
        }
    }
}

#[test]
fn gvd_is_linear_in_the_graph() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let s = random_signal(&mut rng, 6, 30);
    let (g1, g2) = (random_graph(&mut rng, 6), random_graph(&mut rng, 6));
    let (a, b) = (0.7, -1.9);
    let combo = WeightedGraph::linear_combination(a, &g1, b, &g2).unwrap();
    for f in [NodeFunction::SquaredDifference, NodeFunction::PairAverage, NodeFunction::instantaneous_correlation(&s, 0, 30)] {
        let r1 = gvd(&s, &g1, &f).unwrap().node_values;
        let r2 = gvd(&s, &g2, &f).unwrap().node_values;
        let rc = gvd(&s, &combo, &f).unwrap().node_values;
        for ((u, v), w) in rc.iter().zip(r1.iter()).zip(r2.iter()) {
            assert!((u - (a * v + b * w)).abs() <= 1e-10);
        }
    }
}

#[test]
fn phase_gvd_sums_to_zero_over_nodes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let n = rng.random_range(2..15);
        let s = random_signal(&mut rng, n, 50);
        let g = random_graph(&mut rng, n);
        let r = gvd(&s, &g, &NodeFunction::PhaseSign { phase: random_phase(&mut rng, n, 50) }).unwrap();
        assert!(r.global().iter().all(|v| v.abs() <= 1e-10));
    }
}

#[test]
fn delta_stream_matches_node_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = random_signal(&mut rng, 5, 12);
    let g = random_graph(&mut rng, 5);
    let f = NodeFunction::SquaredDifference;
    let r = gvd(&s, &g, &f).unwrap();
    let delta = GvdDelta::new(&s, &g, &f).unwrap();
    for (t, slice) in delta.iter().enumerate() {
        for i in 0..5 {
            assert!((slice.row(i).sum() - r.node_values[[i, t]]).abs() <= 1e-12);
        }
    }
}

#[test]
fn modular_connectivity_reductions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s = random_signal(&mut rng, 6, 60);
    let g = random_graph(&mut rng, 6);
    let phase = NodeFunction::PhaseSign { phase: random_phase(&mut rng, 6, 60) };
    let all: Vec<usize> = (0..6).collect();
    assert!(modular_connectivity(&s, &g, &phase, &all, 0..60).unwrap().abs() <= 1e-10);

    let f = NodeFunction::instantaneous_correlation(&s, 10, 50);
    let r = gvd(&s, &g, &f).unwrap();
    let single = modular_connectivity(&s, &g, &f, &[0], 10..50).unwrap();
    let expected = r.node_values.row(0).slice(ndarray::s![10..50]).mean().unwrap();
    assert!((single - expected).abs() <= 1e-10);

    let module = [1, 3, 4];
    let got = modular_connectivity(&s, &g, &f, &module, 10..50).unwrap();
    let NodeFunction::InstantaneousCorrelation { means } = &f else { unreachable!() };
    let x = s.data();
    let mut acc = 0.0;
    for t in 10..50 {
        for &i in &module {
            for j in 0..6 {
                if j != i {
                    acc += g.weight(i, j) * ((x[[i, t]] - means[i]) * (x[[j, t]] - means[j])).abs();
                }
            }
        }
    }
    assert!((got - acc / 40.0).abs() <= 1e-10);
}

#[test]
fn quarter_cycle_lag_has_unit_pli() {
    let (fs, p) = (200.0, 1000);
    let data = Array2::from_shape_fn((2, p), |(i, t)| {
        let arg = 2.0 * PI * 10.0 * t as f64 / fs;
        if i == 0 { arg.cos() } else { (arg - PI / 2.0).cos() }
    });
    let pli = pli_matrix(&MultivariateSignal::new(data, fs).unwrap()).unwrap();
    assert_eq!(pli.weight(0, 1), 1.0);
    assert_eq!(pli.kind(), GraphKind::Pli);
}

#[test]
fn independent_noise_has_low_pli() {
    let mut total = 0.0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        total += pli_matrix(&random_signal(&mut rng, 2, 20_000)).unwrap().weight(0, 1);
    }
    assert!(total / 100.0 < 0.1, "{}", total / 100.0);
}

#[test]
fn connectivity_matrices_are_symmetric_in_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let s = random_signal(&mut rng, 5, 1024);
    let graphs = [
        correlation_matrix(&s, 0..1024).unwrap().graph,
        graphvariate::connectivity::coherence_matrix(&s, 8.0, 13.0).unwrap(),
        pli_matrix(&s).unwrap(),
    ];
    for g in &graphs {
        let (lo, hi) = if g.kind() == GraphKind::Correlation { (-1.0, 1.0) } else { (0.0, 1.0) };
        for i in 0..5 {
            assert_eq!(g.weight(i, i), 0.0);
            for j in 0..5 {
                assert_eq!(g.weight(i, j), g.weight(j, i));
                assert!((lo..=hi).contains(&g.weight(i, j)));
            }
        }
    }
}

#[test]
fn long_epoch_short_window_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let s = random_signal(&mut rng, 4, 4200);
    let scheme = WindowScheme::new(2048, 16, 0).unwrap();
    let r = windowed_gvd(&s, &scheme, GraphKind::Correlation, NodeFunctionKind::SquaredDifference, None, None).unwrap();
    assert_eq!(r.values.dim(), (2, 128));
}

#[test]
fn single_window_equals_direct_modular_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let s = random_signal(&mut rng, 5, 300);
    let scheme = WindowScheme::new(100, 100, 40).unwrap();
    let module = [0, 2];
    let r = windowed_gvd(
        &s,
        &scheme,
        GraphKind::Correlation,
        NodeFunctionKind::InstantaneousCorrelation,
        None,
        Some(&module),
    )
    .unwrap();
    assert_eq!(r.values.dim(), (2, 1));
    for (e, &start) in r.epoch_starts.iter().enumerate() {
        let g = correlation_matrix(&s, start..start + 100).unwrap().graph;
        let f = NodeFunction::instantaneous_correlation(&s, start, start + 100);
        let direct = modular_connectivity(&s, &g, &f, &module, start..start + 100).unwrap();
        assert!((r.values[[e, 0]] - direct).abs() <= 1e-10);
    }
}

#[test]
fn stationary_windows_scatter_evenly_around_the_epoch_value() {
    // τ = 100 with T = 30 covers 90 samples, so the window mean is a genuine
    // sub-sample estimate of the epoch value
    let (mut above, mut below) = (0u64, 0u64);
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let s = random_signal(&mut rng, 6, 100);
        let run = |t| {
            let scheme = WindowScheme::new(100, t, 0).unwrap();
            windowed_gvd(&s, &scheme, GraphKind::Correlation, NodeFunctionKind::InstantaneousCorrelation, None, None)
                .unwrap()
                .values
        };
        let epoch_value = run(100)[[0, 0]];
        let windows = run(30);
        let deviation = windows.row(0).mean().unwrap() - epoch_value;
        if deviation > 0.0 {
            above += 1;
        } else if deviation < 0.0 {
            below += 1;
        }
    }
    let p = binomial_two_sided(above, above + below, 0.5);
    assert!(p > 0.01, "{above} above, {below} below, p = {p}");
}
