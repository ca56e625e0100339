//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (no libtest harness) so the report prints in
//! order. Criteria listed in `KNOWN_SHORTFALLS` may fail without failing the
//! run; every other failure exits non-zero.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use graphvariate::connectivity::{coherence_matrix, gvd, pli_matrix};
use graphvariate::experiments::{
    ar_detect_grid, correlated_source_experiment, spheroid_experiment, triple_product_moment_check, ArGridConfig,
    Method, SpheroidConfig,
};
use graphvariate::spectral::{analytic_signal, hilbert_margin};
use graphvariate::stats::{ks_uniform, one_sample_ttest, student_t_two_sided};
use graphvariate::sum::pairwise_sum;
use graphvariate::{
    graph_weighted_tensor, local_clustering, node_function_tensor, phase_sign, proposition1_equivalence_check,
    signal_product, GraphKind, MultivariateSignal, NetworkTensor, NodeFunction, WeightedGraph,
};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Seed for every stochastic criterion, fixed before any run.
const SEED: u64 = 1;

/// Criteria expected to fall short, with the reason.
const KNOWN_SHORTFALLS: &[(u32, &str)] = &[];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn random_signal(rng: &mut ChaCha8Rng, n: usize, p: usize) -> MultivariateSignal {
    MultivariateSignal::new(Array2::from_shape_simple_fn((n, p), || rng.random_range(-2.0..2.0)), 10.0).unwrap()
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

fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_phase_sum = 0.0_f64;
    let mut wx_exact = true;
    let mut worst_lx = 0.0_f64;
    for _ in 0..20 {
        let n = rng.random_range(2..=12);
        let p = 40;
        let s = random_signal(&mut rng, n, p);
        let g = random_graph(&mut rng, n);
        let r = gvd(&s, &g, &NodeFunction::PhaseSign { phase: random_phase(&mut rng, n, p) }).unwrap();
        worst_phase_sum = r.global().iter().fold(worst_phase_sum, |m, v| m.max(v.abs()));

        let x = s.data();
        let w = g.weights();
        let partner = NetworkTensor::from_fn(n, p, |_, j, t| x[[j, t]]);
        let product = signal_product(&g, &partner).unwrap();
        let wx = Array2::from_shape_fn((n, p), |(i, t)| {
            pairwise_sum(&(0..n).map(|k| w[[i, k]] * x[[k, t]]).collect::<Vec<_>>())
        });
        wx_exact &= product == wx;
        let difference = NetworkTensor::from_fn(n, p, |i, j, t| x[[i, t]] - x[[j, t]]);
        let lx = g.laplacian().dot(&x);
        worst_lx = worst_lx.max(max_abs_diff(&signal_product(&g, &difference).unwrap(), &lx));
    }
    let mut prop1 = 0;
    for _ in 0..100 {
        let n = rng.random_range(2..=10);
        let s = random_signal(&mut rng, n, 15);
        let g = random_graph(&mut rng, n);
        let a = Array2::from_shape_simple_fn((n, n), || rng.random_range(-2.0..2.0));
        prop1 += usize::from(proposition1_equivalence_check(&g, &s, a.view()).unwrap());
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst_phase_sum <= 1e-10 && wx_exact && worst_lx <= 1e-10 && prop1 == 100 && secs < 10.0;
    outcome(
        pass,
        format!(
            "phase-sign |global sum| ≤ {worst_phase_sum:.1e}; W·X exact: {wx_exact}; \
             |(D−W)·X error| ≤ {worst_lx:.1e}; linear-function equivalence {prop1}/100; {secs:.2} s"
        ),
    )
}

fn clustering_oracle(delta: ndarray::ArrayView2<'_, f64>, i: usize) -> f64 {
    let n = delta.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for k in 0..n {
            s += delta[[i, j]] * delta[[j, k]] * delta[[k, i]];
        }
    }
    s
}

fn node_function_oracle(s: &MultivariateSignal, f: &NodeFunction, i: usize, j: usize, t: usize) -> f64 {
    if i == j {
        return 0.0;
    }
    let x = s.data();
    match f {
        NodeFunction::SquaredDifference => {
            let col: Vec<f64> = (0..s.nodes()).map(|k| x[[k, t]]).collect();
            let n = col.len() as f64;
            let m = col.iter().sum::<f64>() / n;
            let sd = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            ((x[[i, t]] - m) / sd - (x[[j, t]] - m) / sd).powi(2)
        }
        NodeFunction::InstantaneousCorrelation { means } => ((x[[i, t]] - means[i]) * (x[[j, t]] - means[j])).abs(),
        NodeFunction::EnvelopeSquaredDifference { envelope } => (envelope[[i, t]] - envelope[[j, t]]).powi(2),
        NodeFunction::EnvelopeInstantaneousCorrelation { envelope, means } => {
            ((envelope[[i, t]] - means[i]) * (envelope[[j, t]] - means[j])).abs()
        }
        NodeFunction::PhaseSign { phase } => {
            let d = (phase[[i, t]] - phase[[j, t]]).sin();
            if d > 0.0 {
                1.0
            } else if d < 0.0 {
                -1.0
            } else {
                0.0
            }
        }
        NodeFunction::PairAverage => 0.5 * (x[[i, t]] + x[[j, t]]),
    }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_cloc = 0.0_f64;
    for _ in 0..50 {
        let n = rng.random_range(2..=10);
        let s = random_signal(&mut rng, n, 4);
        let g = random_graph(&mut rng, n);
        let d = graph_weighted_tensor(&g, &node_function_tensor(&s, &NodeFunction::PairAverage).unwrap()).unwrap();
        let c = local_clustering(&d);
        for t in 0..4 {
            for i in 0..n {
                worst_cloc = worst_cloc.max((c[[i, t]] - clustering_oracle(d.slice(t), i)).abs());
            }
        }
    }
    let mut worst_f = 0.0_f64;
    for _ in 0..10 {
        let (n, p) = (rng.random_range(2..=8), 30);
        let s = random_signal(&mut rng, n, p);
        let envelope = Array2::from_shape_simple_fn((n, p), || rng.random_range(0.0..3.0));
        let env_means: Array1<f64> = envelope.rows().into_iter().map(|r| r.mean().unwrap()).collect();
        let functions = [
            NodeFunction::SquaredDifference,
            NodeFunction::instantaneous_correlation(&s, 0, p),
            NodeFunction::EnvelopeSquaredDifference { envelope: envelope.clone() },
            NodeFunction::EnvelopeInstantaneousCorrelation { envelope, means: env_means },
            NodeFunction::PhaseSign { phase: random_phase(&mut rng, n, p) },
            NodeFunction::PairAverage,
        ];
        for f in &functions {
            let j = node_function_tensor(&s, f).unwrap();
            for t in 0..p {
                for a in 0..n {
                    for b in 0..n {
                        worst_f = worst_f.max((j.get(a, b, t) - node_function_oracle(&s, f, a, b, t)).abs());
                    }
                }
            }
        }
    }
    outcome(
        worst_cloc <= 1e-10 && worst_f <= 1e-12,
        format!("C_loc vs triple loop ≤ {worst_cloc:.1e} (50 instances); node functions vs double loop ≤ {worst_f:.1e}"),
    )
}

fn criterion_3() -> Outcome {
    let (fs, p) = (200.0, 1000);
    let tone = |amp: f64, shift: f64| -> Vec<f64> {
        (0..p).map(|t| amp * (2.0 * PI * 10.0 * t as f64 / fs - shift).cos()).collect()
    };
    let rows = |r: [Vec<f64>; 2]| {
        MultivariateSignal::new(Array2::from_shape_fn((2, p), |(i, t)| r[i][t]), fs).unwrap()
    };
    let m = hilbert_margin(p);
    let a = analytic_signal(&rows([tone(1.0, 0.0), tone(2.5, 0.4)])).unwrap();
    let slope = 2.0 * PI * 10.0 / fs;
    let (mut env_err, mut slope_err) = (0.0_f64, 0.0_f64);
    for (i, amp) in [(0, 1.0), (1, 2.5)] {
        for t in m..p - m {
            env_err = env_err.max((a.envelope[[i, t]] - amp).abs() / amp);
            let mut step = a.phase[[i, t]] - a.phase[[i, t - 1]];
            if step < -PI {
                step += 2.0 * PI;
            }
            slope_err = slope_err.max((step - slope).abs() / slope);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let noise: Vec<f64> = (0..2048).map(|_| StandardNormal.sample(&mut rng)).collect();
    let same = MultivariateSignal::new(Array2::from_shape_fn((2, 2048), |(_, t)| noise[t]), fs).unwrap();
    let coh = coherence_matrix(&same, 8.0, 13.0).unwrap().weight(0, 1);

    let lagged = rows([tone(1.0, 0.0), tone(1.0, PI / 2.0)]);
    let pli = pli_matrix(&lagged).unwrap().weight(0, 1);
    let la = analytic_signal(&lagged).unwrap();
    let constant_sign = (m..p - m).all(|t| phase_sign(la.phase[[0, t]], la.phase[[1, t]]) == 1.0);

    let pass = env_err <= 0.01 && slope_err <= 0.01 && (coh - 1.0).abs() <= 1e-9 && pli == 1.0 && constant_sign;
    outcome(
        pass,
        format!(
            "envelope error {:.3}%, phase-slope error {:.3}%; identical-signal coherence {coh:.12}; \
             quarter-cycle PLI {pli} (sign constant on interior: {constant_sign})",
            100.0 * env_err,
            100.0 * slope_err
        ),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let config = ArGridConfig {
        sizes: vec![2, 4, 8, 16, 32, 64],
        populations: (1..=10).map(|k| 5 * k).collect(),
        repetitions: 20,
        seed: SEED,
        ..Default::default()
    };
    let report = ar_detect_grid(&config, 1).unwrap();
    let share = report.fraction_significant(Method::InstantaneousCorrelation, 16, 25, 0.05);
    let (wins, losses, sign_p) = report.sign_test(Method::InstantaneousCorrelation, Method::SquaredDifference);
    let confirmation = correlated_source_experiment(128, 25, SEED).unwrap();
    let p128 = confirmation.test(Method::InstantaneousCorrelation).map_or(1.0, |t| t.p_value);
    let secs = start.elapsed().as_secs_f64();
    let pass = share >= 0.95 && sign_p < 0.01 && p128 < 0.05 && secs < 1800.0;
    outcome(
        pass,
        format!(
            "ico significant at (h=16, pop=25) in {:.0}% of 20 repetitions; ico beats sqd {wins}:{losses} \
             (sign test p = {sign_p:.2e}); h=128 pop=25 confirmation p = {p128:.4}; {secs:.0} s",
            100.0 * share
        ),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let config = SpheroidConfig { seed: SEED, ..Default::default() };
    let report = spheroid_experiment(&config, 1).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let get = |label: &str| report.overall(label).expect("detector summarised");
    let cloc_any = get("C_loc").any_pct;
    let competitors: Vec<(String, f64)> = report
        .summary
        .iter()
        .filter(|s| s.delta.is_none() && s.detector != "C_loc")
        .map(|s| (s.detector.clone(), s.any_pct))
        .collect();
    let best_other = competitors.iter().cloned().fold((String::new(), f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
    // reference rates: (detector, centre %, any %)
    let table = [("max", 9.7, 28.2), ("C_loc", 18.4, 41.1), ("W_hat", 17.4, 30.3)];
    let mut headline_ok = true;
    let mut parts = Vec::new();
    for (label, centre, any) in table {
        let s = get(label);
        headline_ok &= (s.centre_pct - centre).abs() <= 5.0 && (s.any_pct - any).abs() <= 5.0;
        parts.push(format!("{label} {:.1}/{:.1} (reference {centre}/{any})", s.centre_pct, s.any_pct));
    }
    let mut laplacian_ok = true;
    for (label, reference) in [("L", 4.8), ("L3", 2.5)] {
        let c = get(label).centre_pct;
        laplacian_ok &= (c - reference).abs() <= 5.0;
        parts.push(format!("{label} centre {c:.1} (reference {reference})"));
    }
    let pass = cloc_any > best_other.1 && headline_ok && laplacian_ok && secs < 1200.0;
    outcome(
        pass,
        format!(
            "C_loc any {cloc_any:.1}% vs best competitor {} {:.1}%; {}; {secs:.0} s",
            best_other.0,
            best_other.1,
            parts.join(", ")
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut worst_z = 0.0_f64;
    let mut printed = Vec::new();
    for delta in [0.0, 0.3, 0.5] {
        for sigma in [0.1, 0.3] {
            let m = triple_product_moment_check(delta, sigma, 200_000, SEED).unwrap();
            worst_z = worst_z.max(m.z_score(m.independent_expansion));
            printed.push(format!("({delta},{sigma}): {:.3} vs {:.3}", m.empirical_mean, m.printed_closed_form));
        }
    }
    outcome(
        worst_z < 4.0,
        format!(
            "max |z| against 8δ³ + 6δσ² = {worst_z:.2}; empirical vs printed 24σ²δ + 40δ³ (reported only): {}",
            printed.join("; ")
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let p: Vec<f64> = (0..10_000)
        .map(|_| {
            let sample: Vec<f64> = (0..10).map(|_| StandardNormal.sample(&mut rng)).collect();
            one_sample_ttest(&sample).unwrap().p_value
        })
        .collect();
    let ks = ks_uniform(&p).unwrap();
    let t0 = student_t_two_sided(0.0, 9.0);
    let symmetric = one_sample_ttest(&[-2.0, -1.0, 1.0, 2.0]).unwrap().p_value;
    outcome(
        ks.p_value > 0.001 && t0 == 1.0 && symmetric == 1.0,
        format!("KS D = {:.4}, p = {:.3} over 10⁴ null p-values; p(t=0) = {t0}, {symmetric}", ks.statistic, ks.p_value),
    )
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn criterion_8() -> Outcome {
    let work = tempfile::tempdir().unwrap();
    let input = work.path().join("signal.csv");
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let data = Array2::from_shape_fn((5, 800), |(i, t)| {
        (2.0 * PI * 10.0 * t as f64 / 128.0 + i as f64).sin() + 0.5 * rng.random_range(-1.0..1.0)
    });
    graphvariate_cli::io::write_signal(&input, &MultivariateSignal::new(data, 128.0).unwrap()).unwrap();
    let input = input.to_str().unwrap().to_string();
    let analysis = |cmd: &str, extra: &[&str]| -> Vec<String> {
        let mut v: Vec<String> =
            [cmd, "--input-path", &input, "--sample-rate", "128", "--seed", "7"].iter().map(|s| s.to_string()).collect();
        v.extend(extra.iter().map(|s| s.to_string()));
        v
    };
    let commands: Vec<(&str, Vec<String>)> = vec![
        ("analyze", analysis("analyze", &["--graph-kind", "pli", "--node-function", "phase_sign", "--band", "8,12", "--window-scheme", "128,32,0"])),
        ("connectivity", analysis("connectivity", &["--graph-kind", "coherence", "--band", "8,12"])),
        ("cluster", analysis("cluster", &["--node-function", "env_ico", "--band", "8,12"])),
        (
            "simulate ar-detect",
            ["simulate", "ar-detect", "--sizes", "2,8", "--populations", "5,10", "--repetitions", "1", "--seed", "7"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        ),
        (
            "simulate spheroid",
            ["simulate", "spheroid", "--dims", "6,6,6", "--deltas", "0.5", "--seeds", "1", "--samples", "100", "--seed", "7"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        ),
    ];
    let mut identical = Vec::new();
    let mut all = true;
    for (k, (name, args)) in commands.iter().enumerate() {
        let dir = work.path().join(format!("out{k}"));
        let run = || {
            let out = Command::new(env!("CARGO_BIN_EXE_gvsa"))
                .args(args)
                .args(["--threads", "1", "--output-dir", dir.to_str().unwrap()])
                .output()
                .unwrap();
            assert!(out.status.success(), "{name} failed: {}", String::from_utf8_lossy(&out.stderr));
            snapshot(&dir)
        };
        let (first, second) = (run(), run());
        let same = first == second && !first.is_empty();
        all &= same;
        identical.push(format!("{name} {}", if same { "identical" } else { "DIFFERENT" }));
    }
    outcome(all, identical.join(", "))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 8] = [
        (1, "algebraic identities", criterion_1),
        (2, "oracle equivalence", criterion_2),
        (3, "spectral correctness", criterion_3),
        (4, "correlated-source detection", criterion_4),
        (5, "spheroid detection", criterion_5),
        (6, "triple-product moment", criterion_6),
        (7, "t-test calibration", criterion_7),
        (8, "CLI determinism", criterion_8),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        let o = run();
        let shortfall = KNOWN_SHORTFALLS.iter().find(|(k, _)| *k == id);
        let verdict = match (o.pass, shortfall) {
            (true, _) => "PASS".to_string(),
            (false, Some((_, why))) => format!("FAIL (known shortfall: {why})"),
            (false, None) => {
                unexpected.push(id);
                "FAIL".to_string()
            }
        };
        println!("criterion {id} [{name}]: {verdict} — {}", o.detail);
    }
    if !unexpected.is_empty() {
        eprintln!("acceptance: unexpected failures in criteria {unexpected:?}");
        std::process::exit(1);
    }
}
