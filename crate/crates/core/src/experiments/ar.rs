use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::rng::{derive_seed, stream, TAG_AR_MEMBER, TAG_AR_REPETITION};
use super::run_jobs;
use crate::connectivity::{correlation_matrix, gvd};
use crate::error::{Error, Result};
use crate::node_function::NodeFunction;
use crate::signal::MultivariateSignal;
use crate::stats::{one_sample_ttest, sign_test, TTestResult};
use crate::sum::pairwise_sum;

/// Samples per realisation in the correlated-source experiment.
pub const SIGNAL_LENGTH: usize = 1000;

/// z(t) = c0 + φ₁ z(t−1) + φ₂ z(t−2) + ε,  ε ~ N(0, noise_variance).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArModel {
    pub c0: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub noise_variance: f64,
    pub burn_in: usize,
    pub seed: u64,
}

impl Default for ArModel {
    fn default() -> Self {
        Self { c0: 0.5, phi1: 0.7, phi2: 0.25, noise_variance: 0.1, burn_in: 200, seed: 0 }
    }
}

impl ArModel {
    pub fn validate(&self) -> Result<()> {
        let stationary = self.phi1 + self.phi2 < 1.0 && self.phi2 - self.phi1 < 1.0 && self.phi2.abs() < 1.0;
        if !stationary {
            return Err(Error::InvalidParameter(format!(
                "AR(2) with φ₁ = {}, φ₂ = {} is not stationary",
                self.phi1, self.phi2
            )));
        }
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise variance {} must be ≥ 0", self.noise_variance)));
        }
        Ok(())
    }

    /// Stationary mean c0 / (1 − φ₁ − φ₂).
    pub fn fixed_point(&self) -> f64 {
        self.c0 / (1.0 - self.phi1 - self.phi2)
    }
}

/// One realisation drawn from `rng`: start both lags at the fixed point,
/// run `burn_in` steps, then return `length` samples.
pub fn ar2_generate_with<R: Rng + ?Sized>(model: &ArModel, length: usize, rng: &mut R) -> Vec<f64> {
    let noise = Normal::new(0.0, model.noise_variance.sqrt()).expect("validated variance");
    let z0 = model.fixed_point();
    let (mut prev2, mut prev1) = (z0, z0);
    let mut out = Vec::with_capacity(length);
    for step in 0..model.burn_in + length {
        let z = model.c0 + model.phi1 * prev1 + model.phi2 * prev2 + noise.sample(rng);
        prev2 = prev1;
        prev1 = z;
        if step >= model.burn_in {
            out.push(z);
        }
    }
    out
}

/// One realisation from the model's own seed.
pub fn ar2_generate(model: &ArModel, length: usize) -> Result<Vec<f64>> {
    model.validate()?;
    if length < 2 {
        return Err(Error::TooShort { needed: 2, got: length });
    }
    Ok(ar2_generate_with(model, length, &mut stream(model.seed, &[])))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Sum of the signal itself.
    Raw,
    SquaredDifference,
    InstantaneousCorrelation,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Raw, Method::SquaredDifference, Method::InstantaneousCorrelation];

    pub fn name(self) -> &'static str {
        match self {
            Method::Raw => "raw",
            Method::SquaredDifference => "squared_difference",
            Method::InstantaneousCorrelation => "instantaneous_correlation",
        }
    }
}

/// Correlated-minus-uncorrelated scalars of one population member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemberDifferences {
    pub raw: f64,
    pub squared_difference: f64,
    pub instantaneous_correlation: f64,
}

impl MemberDifferences {
    pub fn get(&self, method: Method) -> f64 {
        match method {
            Method::Raw => self.raw,
            Method::SquaredDifference => self.squared_difference,
            Method::InstantaneousCorrelation => self.instantaneous_correlation,
        }
    }
}

/// Node GVD connectivity summed over nodes and samples, graph and
/// statistics estimated over the whole signal.
fn gvd_total(signal: &MultivariateSignal, function: &NodeFunction) -> Result<f64> {
    let graph = correlation_matrix(signal, 0..signal.samples())?.graph;
    let r = gvd(signal, &graph, function)?;
    Ok(pairwise_sum(&r.node_values.iter().copied().collect::<Vec<_>>()))
}

fn set_scores(signal: &MultivariateSignal) -> Result<[f64; 3]> {
    let raw = pairwise_sum(&signal.data().iter().copied().collect::<Vec<_>>());
    let sqd = gvd_total(signal, &NodeFunction::SquaredDifference)?;
    let ico = gvd_total(signal, &NodeFunction::instantaneous_correlation(signal, 0, signal.samples()))?;
    Ok([raw, sqd, ico])
}

/// One member: 2h realisations; the uncorrelated set averages consecutive
/// disjoint pairs, the correlated set differs only in its first signal, the
/// average of realisations 1 and 3.
pub fn correlated_source_member(model: &ArModel, h: usize, length: usize, seed: u64) -> Result<MemberDifferences> {
    if h < 2 {
        return Err(Error::InvalidParameter(format!("signal size h = {h} must be ≥ 2")));
    }
    model.validate()?;
    let mut rng = stream(seed, &[]);
    let z: Vec<Vec<f64>> = (0..2 * h).map(|_| ar2_generate_with(model, length, &mut rng)).collect();
    let uncorrelated = Array2::from_shape_fn((h, length), |(i, t)| 0.5 * (z[2 * i][t] + z[2 * i + 1][t]));
    let mut correlated = uncorrelated.clone();
    for t in 0..length {
        correlated[[0, t]] = 0.5 * (z[0][t] + z[2][t]);
    }
    let u = set_scores(&MultivariateSignal::new(uncorrelated, 1.0)?)?;
    let c = set_scores(&MultivariateSignal::new(correlated, 1.0)?)?;
    Ok(MemberDifferences { raw: c[0] - u[0], squared_difference: c[1] - u[1], instantaneous_correlation: c[2] - u[2] })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodTest {
    pub method: Method,
    /// `None` when the population's differences have zero variance.
    pub test: Option<TTestResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatedSourceResult {
    pub h: usize,
    pub members: Vec<MemberDifferences>,
    pub tests: Vec<MethodTest>,
}

impl CorrelatedSourceResult {
    pub fn test(&self, method: Method) -> Option<TTestResult> {
        self.tests.iter().find(|t| t.method == method).and_then(|t| t.test)
    }

    pub fn degenerate(&self, method: Method) -> bool {
        self.test(method).is_none()
    }
}

fn method_tests(members: &[MemberDifferences]) -> Result<Vec<MethodTest>> {
    Method::ALL
        .iter()
        .map(|&method| {
            let values: Vec<f64> = members.iter().map(|m| m.get(method)).collect();
            match one_sample_ttest(&values) {
                Ok(test) => Ok(MethodTest { method, test: Some(test) }),
                Err(Error::DegenerateVariance) => Ok(MethodTest { method, test: None }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Runs the experiment on explicitly seeded members.
pub fn correlated_source_from_seeds(
    model: &ArModel,
    h: usize,
    length: usize,
    member_seeds: &[u64],
) -> Result<CorrelatedSourceResult> {
    if member_seeds.len() < 2 {
        return Err(Error::InvalidParameter(format!("population of {} is below 2", member_seeds.len())));
    }
    let members = member_seeds
        .iter()
        .map(|&s| correlated_source_member(model, h, length, s))
        .collect::<Result<Vec<_>>>()?;
    let tests = method_tests(&members)?;
    Ok(CorrelatedSourceResult { h, members, tests })
}

fn member_seed(seed: u64, h: usize, member: usize) -> u64 {
    derive_seed(seed, &[TAG_AR_MEMBER, h as u64, member as u64])
}

/// Correlated-source detection for one (h, population) with the default model.
/// Member k's stream depends only on (seed, h, k), so smaller populations are
/// prefixes of larger ones.
pub fn correlated_source_experiment(h: usize, population: usize, seed: u64) -> Result<CorrelatedSourceResult> {
    let seeds: Vec<u64> = (0..population).map(|k| member_seed(seed, h, k)).collect();
    correlated_source_from_seeds(&ArModel::default(), h, SIGNAL_LENGTH, &seeds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArGridConfig {
    pub sizes: Vec<usize>,
    pub populations: Vec<usize>,
    pub repetitions: usize,
    pub seed: u64,
    pub signal_length: usize,
    pub model: ArModel,
}

impl Default for ArGridConfig {
    fn default() -> Self {
        Self {
            sizes: vec![2, 4, 8, 16, 32, 64, 128, 256, 512],
            populations: (1..=10).map(|k| 5 * k).collect(),
            repetitions: 1,
            seed: 0,
            signal_length: SIGNAL_LENGTH,
            model: ArModel::default(),
        }
    }
}

/// One (repetition, h, population, method) t test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArCell {
    pub repetition: usize,
    pub h: usize,
    pub population: usize,
    pub method: Method,
    pub p_value: Option<f64>,
    pub statistic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArGridReport {
    pub config: ArGridConfig,
    pub cells: Vec<ArCell>,
}

impl ArGridReport {
    pub fn p_value(&self, repetition: usize, method: Method, h: usize, population: usize) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.repetition == repetition && c.method == method && c.h == h && c.population == population)
            .and_then(|c| c.p_value)
    }

    /// Share of repetitions with p < alpha at (h, population).
    pub fn fraction_significant(&self, method: Method, h: usize, population: usize, alpha: f64) -> f64 {
        let hits = (0..self.config.repetitions)
            .filter(|&r| self.p_value(r, method, h, population).is_some_and(|p| p < alpha))
            .count();
        hits as f64 / self.config.repetitions as f64
    }

    /// Sign test over all (repetition, h, population) cells that `a` yields
    /// the smaller p-value than `b`. Degenerate tests count as p = 1; exact
    /// ties are dropped. Returns (wins, losses, one-sided p).
    pub fn sign_test(&self, a: Method, b: Method) -> (u64, u64, f64) {
        let (mut wins, mut losses) = (0u64, 0u64);
        for r in 0..self.config.repetitions {
            for &h in &self.config.sizes {
                for &pop in &self.config.populations {
                    let pa = self.p_value(r, a, h, pop).unwrap_or(1.0);
                    let pb = self.p_value(r, b, h, pop).unwrap_or(1.0);
                    if pa < pb {
                        wins += 1;
                    } else if pa > pb {
                        losses += 1;
                    }
                }
            }
        }
        (wins, losses, sign_test(wins, losses))
    }
}

/// The full (repetition × h × population × method) grid. Each
/// (repetition, h) job draws max(populations) members once and tests every
/// population on its prefix.
pub fn ar_detect_grid(config: &ArGridConfig, threads: usize) -> Result<ArGridReport> {
    config.model.validate()?;
    if config.populations.iter().any(|&p| p < 2) || config.populations.is_empty() {
        return Err(Error::InvalidParameter("populations must be non-empty and ≥ 2".into()));
    }
    if config.sizes.iter().any(|&h| h < 2) || config.sizes.is_empty() {
        return Err(Error::InvalidParameter("signal sizes must be non-empty and ≥ 2".into()));
    }
    if config.repetitions == 0 {
        return Err(Error::InvalidParameter("need at least one repetition".into()));
    }
    let max_pop = *config.populations.iter().max().expect("non-empty");
    let jobs: Vec<(usize, usize)> =
        (0..config.repetitions).flat_map(|r| config.sizes.iter().map(move |&h| (r, h))).collect();
    let outcomes = run_jobs(threads, &jobs, |&(r, h)| -> Result<Vec<ArCell>> {
        let rep_seed = derive_seed(config.seed, &[TAG_AR_REPETITION, r as u64]);
        let members = (0..max_pop)
            .map(|k| correlated_source_member(&config.model, h, config.signal_length, member_seed(rep_seed, h, k)))
            .collect::<Result<Vec<_>>>()?;
        let mut cells = Vec::new();
        for &population in &config.populations {
            for t in method_tests(&members[..population])? {
                cells.push(ArCell {
                    repetition: r,
                    h,
                    population,
                    method: t.method,
                    p_value: t.test.map(|x| x.p_value),
                    statistic: t.test.map(|x| x.statistic),
                });
            }
        }
        Ok(cells)
    })?;
    let mut cells = Vec::new();
    for o in outcomes {
        cells.extend(o?);
    }
    Ok(ArGridReport { config: config.clone(), cells })
}
