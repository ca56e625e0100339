//! Multivariate signals: n univariate signals sampled at p instants.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::sum::pairwise_sum;

/// An n×p real matrix of node signals (rows) over samples (columns).
///
/// Construction rejects non-finite entries, fewer than two nodes or
/// fewer than two samples, and a non-positive sample rate. `sample_rate`
/// is samples per unit of the sampling axis (Hz for time series,
/// samples per metre for depth logs).
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateSignal {
    data: Array2<f64>,
    sample_rate: f64,
    labels: Option<Vec<String>>,
}

impl MultivariateSignal {
    pub fn new(data: Array2<f64>, sample_rate: f64) -> Result<Self> {
        let (n, p) = data.dim();
        if n < 2 {
            return Err(Error::InvalidSignal(format!("need at least 2 nodes, got {n}")));
        }
        if p < 2 {
            return Err(Error::InvalidSignal(format!("need at least 2 samples, got {p}")));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidSignal(format!(
                "sample rate must be finite and positive, got {sample_rate}"
            )));
        }
        if let Some(((i, t), v)) = data.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidSignal(format!("non-finite value {v} at node {i}, sample {t}")));
        }
        Ok(Self { data, sample_rate, labels: None })
    }

    /// Attaches node labels; there must be exactly one per node.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.nodes() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} nodes",
                labels.len(),
                self.nodes()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn nodes(&self) -> usize {
        self.data.nrows()
    }

    pub fn samples(&self) -> usize {
        self.data.ncols()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn data(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn into_data(self) -> Array2<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.data.row(i)
    }

    pub fn column(&self, t: usize) -> ArrayView1<'_, f64> {
        self.data.column(t)
    }

    /// Replaces the sample matrix, keeping rate and labels.
    pub fn with_data(&self, data: Array2<f64>) -> Result<Self> {
        if data.nrows() != self.nodes() {
            return Err(Error::DimensionMismatch(format!(
                "replacement has {} rows, signal has {} nodes",
                data.nrows(),
                self.nodes()
            )));
        }
        let mut out = Self::new(data, self.sample_rate)?;
        out.labels = self.labels.clone();
        Ok(out)
    }

    /// Copy of samples `start..end` (all nodes).
    pub fn epoch(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.samples() {
            return Err(Error::OutOfRange(format!(
                "epoch {start}..{end} outside 0..{}",
                self.samples()
            )));
        }
        self.with_data(self.data.slice(ndarray::s![.., start..end]).to_owned())
    }

    /// Time mean of each node over `start..end`.
    pub fn node_means(&self, start: usize, end: usize) -> Vec<f64> {
        self.data
            .axis_iter(Axis(0))
            .map(|row| {
                let seg = row.slice(ndarray::s![start..end]).to_vec();
                pairwise_sum(&seg) / seg.len() as f64
            })
            .collect()
    }
}

/// Normalises each sample column over the node space: subtract the column
/// mean and divide by the sample standard deviation (denominator n−1).
///
/// A constant column maps to all zeros.
pub fn node_normalize(signal: &MultivariateSignal) -> MultivariateSignal {
    let mut out = signal.data.clone();
    let n = signal.nodes() as f64;
    for mut col in out.axis_iter_mut(Axis(1)) {
        let values = col.to_vec();
        let mean = pairwise_sum(&values) / n;
        let ss: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let sd = (pairwise_sum(&ss) / (n - 1.0)).sqrt();
        let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if sd <= f64::EPSILON * scale || sd == 0.0 {
            col.fill(0.0);
        } else {
            col.mapv_inplace(|v| (v - mean) / sd);
        }
    }
    MultivariateSignal { data: out, sample_rate: signal.sample_rate, labels: signal.labels.clone() }
}
