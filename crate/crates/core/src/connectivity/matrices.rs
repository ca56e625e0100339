use std::ops::Range;

use ndarray::{s, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::graph::{GraphKind, WeightedGraph};
use crate::node_function::phase_sign;
use crate::signal::MultivariateSignal;
use crate::spectral::{analytic_signal, welch_spectra};
use crate::sum::pairwise_sum;

/// Pearson correlation graph plus the nodes whose rows were constant.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationEstimate {
    pub graph: WeightedGraph,
    /// Nodes with zero variance over the epoch; all their weights are 0.
    pub constant_nodes: Vec<usize>,
}

fn check_epoch(epoch: &Range<usize>, samples: usize, min_len: usize) -> Result<()> {
    if epoch.end > samples || epoch.start >= epoch.end {
        return Err(Error::OutOfRange(format!("epoch {epoch:?} outside 0..{samples}")));
    }
    if epoch.len() < min_len {
        return Err(Error::TooShort { needed: min_len, got: epoch.len() });
    }
    Ok(())
}

/// Pearson correlation of every node pair over `epoch`.
pub fn correlation_matrix(signal: &MultivariateSignal, epoch: Range<usize>) -> Result<CorrelationEstimate> {
    check_epoch(&epoch, signal.samples(), 3)?;
    let n = signal.nodes();
    let len = epoch.len();
    let centred: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let seg = signal.row(i).slice(s![epoch.clone()]).to_vec();
            let m = pairwise_sum(&seg) / len as f64;
            seg.iter().map(|v| v - m).collect()
        })
        .collect();
    let mut buf = vec![0.0; len];
    let mut dot = |a: &[f64], b: &[f64]| {
        for ((o, x), y) in buf.iter_mut().zip(a).zip(b) {
            *o = x * y;
        }
        pairwise_sum(&buf)
    };
    let norms: Vec<f64> = centred.iter().map(|c| dot(c, c).sqrt()).collect();
    let constant_nodes: Vec<usize> = (0..n)
        .filter(|&i| {
            let scale = centred[i].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            norms[i] == 0.0 || norms[i] <= f64::EPSILON * scale
        })
        .collect();
    let mut w = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            if constant_nodes.contains(&i) || constant_nodes.contains(&j) {
                continue;
            }
            let c = (dot(&centred[i], &centred[j]) / (norms[i] * norms[j])).clamp(-1.0, 1.0);
            w[[i, j]] = c;
            w[[j, i]] = c;
        }
    }
    Ok(CorrelationEstimate { graph: WeightedGraph::new(w, GraphKind::Correlation)?, constant_nodes })
}

/// Magnitude-squared coherence averaged over the Welch bins in [low_hz, high_hz].
pub fn coherence_matrix(signal: &MultivariateSignal, low_hz: f64, high_hz: f64) -> Result<WeightedGraph> {
    let nyquist = signal.sample_rate() / 2.0;
    if !(low_hz >= 0.0 && low_hz < high_hz && high_hz <= nyquist) {
        return Err(Error::InvalidBand(format!("need 0 ≤ low < high ≤ {nyquist} Hz, got {low_hz}..{high_hz}")));
    }
    let density = welch_spectra(signal)?;
    let bins = density.band_bins(low_hz, high_hz);
    if bins.is_empty() {
        return Err(Error::InvalidBand(format!(
            "no spectral bin inside {low_hz}..{high_hz} Hz (resolution {} Hz)",
            density.frequencies[1]
        )));
    }
    let n = signal.nodes();
    let mut w = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let msc = density.magnitude_squared_coherence(i, j);
            let in_band: Vec<f64> = bins.iter().map(|&k| msc[k]).collect();
            let c = (pairwise_sum(&in_band) / in_band.len() as f64).clamp(0.0, 1.0);
            w[[i, j]] = c;
            w[[j, i]] = c;
        }
    }
    WeightedGraph::new(w, GraphKind::Coherence)
}

/// PLI from precomputed phases (n×p) over the samples in `range`.
pub fn pli_from_phase(phase: ArrayView2<'_, f64>, range: Range<usize>) -> Result<WeightedGraph> {
    let (n, p) = phase.dim();
    check_epoch(&range, p, 1)?;
    let mut w = Array2::zeros((n, n));
    let mut buf = vec![0.0; range.len()];
    for i in 0..n {
        for j in (i + 1)..n {
            for (o, t) in buf.iter_mut().zip(range.clone()) {
                *o = phase_sign(phase[[i, t]], phase[[j, t]]);
            }
            let c = (pairwise_sum(&buf) / buf.len() as f64).abs().min(1.0);
            w[[i, j]] = c;
            w[[j, i]] = c;
        }
    }
    WeightedGraph::new(w, GraphKind::Pli)
}

/// Phase-lag index |⟨sgn(φᵢ − φⱼ)⟩| over the samples clear of the Hilbert margins.
pub fn pli_matrix(signal: &MultivariateSignal) -> Result<WeightedGraph> {
    let analytic = analytic_signal(signal)?;
    let p = signal.samples();
    let m = analytic.margin;
    if 2 * m >= p {
        return Err(Error::TooShort { needed: 2 * m + 1, got: p });
    }
    pli_from_phase(analytic.phase.view(), m..p - m)
}
