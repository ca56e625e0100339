use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::rng::{derive_seed, stream, TAG_SPHEROID};
use super::run_jobs;
use crate::error::{Error, Result};
use crate::graph::{GraphKind, WeightedGraph};
use crate::gsp::{argmax, build_operator, GraphOperator, LaplacianSpectrum, OperatorKind};
use crate::signal::MultivariateSignal;

/// Standard deviation of the background noise.
pub const SPHEROID_NOISE_SD: f64 = 0.3;

fn gaussian_axis(len: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_fn((len, len), |(a, b)| {
        let d = a as f64 - b as f64;
        (-d * d * scale).exp()
    })
}

/// Applies M₀ ⊗ M₁ ⊗ M₂ to a vector laid out as [x][y][z] (z fastest).
/// Each Mₐ is (outₐ × inₐ).
fn kron_apply(mats: [&Array2<f64>; 3], v: &[f64]) -> Vec<f64> {
    let (o0, i0) = mats[0].dim();
    let (o1, i1) = mats[1].dim();
    let (o2, i2) = mats[2].dim();
    debug_assert_eq!(v.len(), i0 * i1 * i2);
    // z axis
    let mut a = vec![0.0; i0 * i1 * o2];
    for xy in 0..i0 * i1 {
        for oz in 0..o2 {
            let row = mats[2].row(oz);
            a[xy * o2 + oz] = (0..i2).map(|z| row[z] * v[xy * i2 + z]).sum();
        }
    }
    // y axis
    let mut b = vec![0.0; i0 * o1 * o2];
    for x in 0..i0 {
        for oy in 0..o1 {
            for y in 0..i1 {
                let m = mats[1][[oy, y]];
                if m == 0.0 {
                    continue;
                }
                for z in 0..o2 {
                    b[(x * o1 + oy) * o2 + z] += m * a[(x * i1 + y) * o2 + z];
                }
            }
        }
    }
    // x axis
    let mut c = vec![0.0; o0 * o1 * o2];
    let plane = o1 * o2;
    for ox in 0..o0 {
        for x in 0..i0 {
            let m = mats[0][[ox, x]];
            if m == 0.0 {
                continue;
            }
            for k in 0..plane {
                c[ox * plane + k] += m * b[x * plane + k];
            }
        }
    }
    c
}

/// Per-axis factors of the separable kernels used by the exact fast
/// pair-average clustering.
#[derive(Debug, Clone)]
struct AxisFactors {
    /// exp(−d²/2) = kernel ∘ kernel
    kernel_sq: Array2<f64>,
    /// kernel ∘ (kernel · kernel)
    kernel_path: Array2<f64>,
    /// exp(−3d²/8)
    pair: Array2<f64>,
    /// (2k − 1) × k: exp(−(h/2 − a)²/2), the blur onto half-integer midpoints
    midpoint: Array2<f64>,
}

impl AxisFactors {
    fn new(len: usize) -> Self {
        let kernel = gaussian_axis(len, 0.25);
        let kernel_sq = gaussian_axis(len, 0.5);
        let kernel_path = &kernel * &kernel.dot(&kernel);
        let pair = gaussian_axis(len, 0.375);
        let midpoint = Array2::from_shape_fn((2 * len - 1, len), |(h, a)| {
            let d = h as f64 / 2.0 - a as f64;
            (-0.5 * d * d).exp()
        });
        Self { kernel_sq, kernel_path, pair, midpoint }
    }
}

/// A dx×dy×dz integer lattice with Gaussian weights w_ij = exp(−d_ij²/4).
#[derive(Debug, Clone)]
pub struct GridWorld {
    dims: [usize; 3],
    positions: Vec<[usize; 3]>,
    graph: WeightedGraph,
    neighbors: Vec<Vec<usize>>,
    axes: [AxisFactors; 3],
}

impl GridWorld {
    pub fn new(dims: [usize; 3]) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) || dims.iter().product::<usize>() < 2 {
            return Err(Error::InvalidParameter(format!("grid {dims:?} needs at least 2 nodes")));
        }
        let positions: Vec<[usize; 3]> = (0..dims[0])
            .flat_map(|x| (0..dims[1]).flat_map(move |y| (0..dims[2]).map(move |z| [x, y, z])))
            .collect();
        let n = positions.len();
        let sq_dist = |a: &[usize; 3], b: &[usize; 3]| -> usize {
            a.iter().zip(b).map(|(p, q)| p.abs_diff(*q).pow(2)).sum()
        };
        let weights = Array2::from_shape_fn((n, n), |(i, j)| {
            if i == j {
                0.0
            } else {
                (-(sq_dist(&positions[i], &positions[j]) as f64) / 4.0).exp()
            }
        });
        let neighbors = positions
            .iter()
            .map(|p| (0..n).filter(|&j| sq_dist(p, &positions[j]) == 1).collect())
            .collect();
        Ok(Self {
            dims,
            graph: WeightedGraph::new(weights, GraphKind::Spatial)?,
            positions,
            neighbors,
            axes: [AxisFactors::new(dims[0]), AxisFactors::new(dims[1]), AxisFactors::new(dims[2])],
        })
    }

    /// The default 10×10×10 world.
    pub fn cube(side: usize) -> Result<Self> {
        Self::new([side; 3])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn nodes(&self) -> usize {
        self.positions.len()
    }

    pub fn position(&self, node: usize) -> [usize; 3] {
        self.positions[node]
    }

    pub fn index(&self, position: [usize; 3]) -> usize {
        (position[0] * self.dims[1] + position[1]) * self.dims[2] + position[2]
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    /// Nodes at Euclidean distance exactly 1.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    fn kron(&self, pick: impl Fn(&AxisFactors) -> &Array2<f64>, v: &[f64]) -> Vec<f64> {
        kron_apply([pick(&self.axes[0]), pick(&self.axes[1]), pick(&self.axes[2])], v)
    }
}

/// C_loc(i) = (Δ³)ᵢᵢ for Δᵢⱼ = ½ wᵢⱼ (xᵢ + xⱼ) on a grid world, without forming Δ.
///
/// The Gaussian kernel makes wᵢⱼ wⱼₖ wₖᵢ = exp(−3dᵢⱼ²/8) · exp(−|p_k − mᵢⱼ|²/2)
/// with mᵢⱼ the midpoint of i and j, so the sum over k is a separable blur
/// evaluated on the half-integer grid. Cost is O(n²) per column instead of
/// O(n³), and the result equals the dense triple sum up to rounding.
pub fn pair_average_clustering(world: &GridWorld, x: &[f64]) -> Result<Vec<f64>> {
    let n = world.nodes();
    if x.len() != n {
        return Err(Error::DimensionMismatch(format!("{} values for {n} grid nodes", x.len())));
    }
    let [dx, dy, dz] = world.dims;
    let (my, mz) = (2 * dy - 1, 2 * dz - 1);
    let x2: Vec<f64> = x.iter().map(|v| v * v).collect();
    let x3: Vec<f64> = x.iter().map(|v| v * v * v).collect();

    // Σ_{k∉{i,j}} wᵢⱼ wⱼₖ wₖᵢ = Eᵢⱼ with E = ⊗(A∘A²) − 2⊗(A∘A); Q drops the diagonal.
    let path_diag = |axis: &AxisFactors, a: usize| axis.kernel_path[[a, a]];
    let q_apply = |v: &[f64]| -> Vec<f64> {
        let p = world.kron(|a| &a.kernel_path, v);
        let s = world.kron(|a| &a.kernel_sq, v);
        (0..n)
            .map(|i| {
                let [a, b, c] = world.positions[i];
                let diag =
                    path_diag(&world.axes[0], a) * path_diag(&world.axes[1], b) * path_diag(&world.axes[2], c) - 2.0;
                p[i] - 2.0 * s[i] - diag * v[i]
            })
            .collect()
    };
    let s0 = q_apply(x);
    let sa = q_apply(&x2);
    // Σ_{j≠i} wᵢⱼ² vⱼ
    let off = |v: &[f64]| -> Vec<f64> {
        let s = world.kron(|a| &a.kernel_sq, v);
        s.iter().zip(v).map(|(a, b)| a - b).collect()
    };
    let (kk1, kk2, kk3) = (off(x), off(&x2), off(&x3));
    let blur = world.kron(|a| &a.midpoint, x);

    let (gx, gy, gz) = (&world.axes[0].pair, &world.axes[1].pair, &world.axes[2].pair);
    let mut out = vec![0.0; n];
    for ix in 0..dx {
        for iy in 0..dy {
            for iz in 0..dz {
                let i = (ix * dy + iy) * dz + iz;
                let gz_row = gz.row(iz);
                let gz_row = gz_row.as_slice().expect("standard layout");
                let (mut p1, mut p2) = (0.0, 0.0);
                for jx in 0..dx {
                    let wx = gx[[ix, jx]];
                    let mx = ix + jx;
                    for jy in 0..dy {
                        let wxy = wx * gy[[iy, jy]];
                        let jbase = (jx * dy + jy) * dz;
                        let mbase = (mx * my + iy + jy) * mz + iz;
                        let xs = &x[jbase..jbase + dz];
                        let x2s = &x2[jbase..jbase + dz];
                        let bs = &blur[mbase..mbase + dz];
                        let (mut a1, mut a2) = (0.0, 0.0);
                        for jz in 0..dz {
                            let w = gz_row[jz] * bs[jz];
                            a1 += w * xs[jz];
                            a2 += w * x2s[jz];
                        }
                        p1 += wxy * a1;
                        p2 += wxy * a2;
                    }
                }
                // drop j = i (pair factor 1, midpoint at pᵢ)
                let self_blur = blur[(2 * ix * my + 2 * iy) * mz + 2 * iz];
                p1 -= x[i] * self_blur;
                p2 -= x2[i] * self_blur;
                let sc = p1 - x[i] * kk1[i] - kk2[i];
                let sb = p2 - x[i] * kk2[i] - kk3[i];
                out[i] = 0.25 * (x[i] * sc + x2[i] * s0[i] + x[i] * sa[i] + sb);
            }
        }
    }
    Ok(out)
}

/// A travelling spheroid over Gaussian background noise.
#[derive(Debug, Clone)]
pub struct SpheroidTrace {
    /// Centre node s(t).
    pub centers: Vec<usize>,
    pub signal: MultivariateSignal,
    pub delta: f64,
    pub noise_sd: f64,
}

/// Background N(0, noise_sd²) everywhere; at each t the centre gets +δ and
/// its distance-1 neighbours +¾δ. The centre starts uniformly at random and
/// then moves to a uniformly chosen distance-1 neighbour each step.
///
/// Noise is drawn before the walk, so traces with the same seed share the
/// background and walk whatever δ is.
pub fn spheroid_generate(
    world: &GridWorld,
    delta: f64,
    length: usize,
    noise_sd: f64,
    seed: u64,
) -> Result<SpheroidTrace> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("δ must be finite and ≥ 0, got {delta}")));
    }
    if length < 2 {
        return Err(Error::TooShort { needed: 2, got: length });
    }
    let normal =
        Normal::new(0.0, noise_sd).map_err(|e| Error::InvalidParameter(format!("noise sd {noise_sd}: {e}")))?;
    let n = world.nodes();
    let mut rng = stream(seed, &[TAG_SPHEROID]);
    let mut data = Array2::from_shape_simple_fn((n, length), || normal.sample(&mut rng));
    let mut centers = Vec::with_capacity(length);
    let mut s = rng.random_range(0..n);
    for t in 0..length {
        if t > 0 {
            let nb = world.neighbors(s);
            if !nb.is_empty() {
                s = nb[rng.random_range(0..nb.len())];
            }
        }
        centers.push(s);
        data[[s, t]] += delta;
        for &z in world.neighbors(s) {
            data[[z, t]] += 0.75 * delta;
        }
    }
    Ok(SpheroidTrace { centers, signal: MultivariateSignal::new(data, 1.0)?, delta, noise_sd })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detector {
    MaxAmplitude,
    Clustering,
    Operator(OperatorKind),
}

impl Detector {
    pub fn label(&self) -> String {
        match self {
            Detector::MaxAmplitude => "max".into(),
            Detector::Clustering => "C_loc".into(),
            Detector::Operator(k) => k.label(),
        }
    }
}

/// Prebuilt baseline operators for one grid world.
#[derive(Debug, Clone)]
pub struct SpheroidDetectors {
    operators: Vec<GraphOperator>,
}

impl SpheroidDetectors {
    /// Ŵ, Ŵ³, L, L³ and one heat kernel per scale (sharing one eigendecomposition).
    pub fn new(world: &GridWorld, heat_scales: &[f64]) -> Result<Self> {
        let g = world.graph();
        let mut operators = Vec::new();
        for kind in [
            OperatorKind::AdjacencySelfLoops,
            OperatorKind::AdjacencyCubed,
            OperatorKind::Laplacian,
            OperatorKind::LaplacianCubed,
        ] {
            operators.push(build_operator(g, kind)?);
        }
        if !heat_scales.is_empty() {
            if let Some(bad) = heat_scales.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
                return Err(Error::InvalidParameter(format!("heat-kernel scale must be ≥ 0, got {bad}")));
            }
            let spectrum = LaplacianSpectrum::new(g);
            for &tau in heat_scales {
                operators.push(GraphOperator { matrix: spectrum.heat_kernel(tau), kind: OperatorKind::HeatKernel(tau) });
            }
        }
        Ok(Self { operators })
    }

    pub fn detectors(&self) -> Vec<Detector> {
        let mut d = vec![Detector::MaxAmplitude, Detector::Clustering];
        d.extend(self.operators.iter().map(|o| Detector::Operator(o.kind)));
        d
    }

    pub fn operators(&self) -> &[GraphOperator] {
        &self.operators
    }
}

/// Hits of one detector over one trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionCounts {
    pub detector: String,
    /// argmax = s(t)
    pub centre: usize,
    /// argmax = s(t) or one of its distance-1 neighbours
    pub any: usize,
    pub samples: usize,
}

fn count_hits(world: &GridWorld, trace: &SpheroidTrace, picks: &[usize], detector: &Detector) -> DetectionCounts {
    let (mut centre, mut any) = (0, 0);
    for (&pick, &s) in picks.iter().zip(&trace.centers) {
        if pick == s {
            centre += 1;
            any += 1;
        } else if world.neighbors(s).contains(&pick) {
            any += 1;
        }
    }
    DetectionCounts { detector: detector.label(), centre, any, samples: picks.len() }
}

/// Per-sample argmax of every detector, scored against the true centres.
pub fn spheroid_detect(
    trace: &SpheroidTrace,
    world: &GridWorld,
    detectors: &SpheroidDetectors,
) -> Result<Vec<DetectionCounts>> {
    let signal = &trace.signal;
    if signal.nodes() != world.nodes() {
        return Err(Error::DimensionMismatch(format!(
            "trace has {} nodes, world {}",
            signal.nodes(),
            world.nodes()
        )));
    }
    let mut out = Vec::new();
    let max_picks: Vec<usize> = signal.data().columns().into_iter().map(argmax).collect();
    out.push(count_hits(world, trace, &max_picks, &Detector::MaxAmplitude));
    let clustering_picks = (0..signal.samples())
        .map(|t| {
            let c = pair_average_clustering(world, &signal.column(t).to_vec())?;
            Ok(argmax(Array1::from(c).view()))
        })
        .collect::<Result<Vec<_>>>()?;
    out.push(count_hits(world, trace, &clustering_picks, &Detector::Clustering));
    for op in &detectors.operators {
        let picks = op.argmax_all(signal)?;
        out.push(count_hits(world, trace, &picks, &Detector::Operator(op.kind)));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpheroidConfig {
    pub dims: [usize; 3],
    pub deltas: Vec<f64>,
    /// Traces per δ.
    pub seeds: usize,
    pub samples: usize,
    pub noise_sd: f64,
    pub heat_scales: Vec<f64>,
    pub seed: u64,
}

impl Default for SpheroidConfig {
    fn default() -> Self {
        Self {
            dims: [10, 10, 10],
            deltas: (1..=9).map(|k| k as f64 / 10.0).collect(),
            seeds: 20,
            samples: 1000,
            noise_sd: SPHEROID_NOISE_SD,
            heat_scales: vec![1.0, 3.0],
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpheroidRun {
    pub delta: f64,
    pub seed_index: usize,
    pub trace_seed: u64,
    pub counts: Vec<DetectionCounts>,
}

/// Hit percentages of one detector, overall or for one δ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorSummary {
    pub detector: String,
    /// `None` for the aggregate over all δ.
    pub delta: Option<f64>,
    pub centre_pct: f64,
    pub any_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpheroidReport {
    pub config: SpheroidConfig,
    pub runs: Vec<SpheroidRun>,
    pub summary: Vec<DetectorSummary>,
}

impl SpheroidReport {
    /// Aggregate percentages for `detector` over all δ.
    pub fn overall(&self, detector: &str) -> Option<&DetectorSummary> {
        self.summary.iter().find(|s| s.delta.is_none() && s.detector == detector)
    }
}

fn summarise(runs: &[SpheroidRun], labels: &[String], deltas: &[f64]) -> Vec<DetectorSummary> {
    let pct = |filter: &dyn Fn(&SpheroidRun) -> bool, label: &str| -> (f64, f64) {
        let (mut c, mut a, mut s) = (0usize, 0usize, 0usize);
        for run in runs.iter().filter(|r| filter(r)) {
            for d in run.counts.iter().filter(|d| d.detector == label) {
                c += d.centre;
                a += d.any;
                s += d.samples;
            }
        }
        let s = s.max(1) as f64;
        (100.0 * c as f64 / s, 100.0 * a as f64 / s)
    };
    let mut out = Vec::new();
    for label in labels {
        let (centre_pct, any_pct) = pct(&|_| true, label);
        out.push(DetectorSummary { detector: label.clone(), delta: None, centre_pct, any_pct });
    }
    for &delta in deltas {
        for label in labels {
            let (centre_pct, any_pct) = pct(&|r: &SpheroidRun| r.delta == delta, label);
            out.push(DetectorSummary { detector: label.clone(), delta: Some(delta), centre_pct, any_pct });
        }
    }
    out
}

/// Runs every (δ, seed) trace through every detector.
pub fn spheroid_experiment(config: &SpheroidConfig, threads: usize) -> Result<SpheroidReport> {
    if config.seeds == 0 || config.deltas.is_empty() {
        return Err(Error::InvalidParameter("need at least one δ and one seed".into()));
    }
    let world = GridWorld::new(config.dims)?;
    let detectors = SpheroidDetectors::new(&world, &config.heat_scales)?;
    let jobs: Vec<(f64, usize)> =
        config.deltas.iter().flat_map(|&d| (0..config.seeds).map(move |k| (d, k))).collect();
    let runs = run_jobs(threads, &jobs, |&(delta, k)| -> Result<SpheroidRun> {
        let trace_seed = derive_seed(config.seed, &[TAG_SPHEROID, delta.to_bits(), k as u64]);
        let trace = spheroid_generate(&world, delta, config.samples, config.noise_sd, trace_seed)?;
        let counts = spheroid_detect(&trace, &world, &detectors)?;
        Ok(SpheroidRun { delta, seed_index: k, trace_seed, counts })
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let labels: Vec<String> = detectors.detectors().iter().map(Detector::label).collect();
    let summary = summarise(&runs, &labels, &config.deltas);
    Ok(SpheroidReport { config: config.clone(), runs, summary })
}
