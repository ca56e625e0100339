use ndarray::{s, Array1, Array2};

use super::gvd::modular_mean;
use super::matrices::{coherence_matrix, correlation_matrix, pli_from_phase};
use crate::error::{Error, Result};
use crate::graph::{GraphKind, WeightedGraph};
use crate::node_function::{NodeFunction, NodeFunctionKind};
use crate::signal::MultivariateSignal;
use crate::spectral::{analytic_signal, bandpass, AnalyticDecomposition};
use crate::sum::pairwise_sum;

/// Disjoint long epochs of τ samples, each split into disjoint windows of T samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct WindowScheme {
    pub tau: usize,
    pub t_window: usize,
    pub start_offset: usize,
}

impl WindowScheme {
    pub fn new(tau: usize, t_window: usize, start_offset: usize) -> Result<Self> {
        if t_window < 2 || tau < 2 {
            return Err(Error::InvalidParameter(format!("τ = {tau} and T = {t_window} must both be ≥ 2")));
        }
        if t_window > tau {
            return Err(Error::InvalidParameter(format!("T = {t_window} exceeds τ = {tau}")));
        }
        Ok(Self { tau, t_window, start_offset })
    }

    /// Whole windows per epoch; a trailing partial window is dropped.
    pub fn windows_per_epoch(&self) -> usize {
        self.tau / self.t_window
    }
}

/// Modular GVD values indexed (epoch, window).
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedGvd {
    pub values: Array2<f64>,
    /// First sample of each epoch.
    pub epoch_starts: Vec<usize>,
    /// Samples skipped at each end for filter and Hilbert end effects.
    pub margin: usize,
    /// Long-term graph of each epoch.
    pub graphs: Vec<WeightedGraph>,
}

fn row_means(a: ndarray::ArrayView2<'_, f64>) -> Array1<f64> {
    a.rows().into_iter().map(|r| pairwise_sum(&r.to_vec()) / r.len() as f64).collect()
}

/// Windowed GVD: for each τ epoch the graph is estimated on the epoch and the
/// node function, with its statistics taken over the same epoch, is averaged
/// over each T window per the modular formula.
///
/// Band-passing and the analytic decomposition run once over the whole
/// signal; epochs are laid out inside the reliable region. `module` defaults
/// to all nodes. A coherence graph requires `band`.
pub fn windowed_gvd(
    signal: &MultivariateSignal,
    scheme: &WindowScheme,
    graph_kind: GraphKind,
    function: NodeFunctionKind,
    band: Option<(f64, f64)>,
    module: Option<&[usize]>,
) -> Result<WindowedGvd> {
    let n = signal.nodes();
    if !matches!(graph_kind, GraphKind::Correlation | GraphKind::Coherence | GraphKind::Pli) {
        return Err(Error::InvalidParameter(format!("{graph_kind:?} graphs are not estimated from the signal")));
    }
    if graph_kind == GraphKind::Coherence && band.is_none() {
        return Err(Error::InvalidParameter("a coherence graph needs a frequency band".into()));
    }
    let all: Vec<usize> = (0..n).collect();
    let module = module.unwrap_or(&all);
    if let Some(&bad) = module.iter().find(|&&i| i >= n) {
        return Err(Error::OutOfRange(format!("module node {bad} outside 0..{n}")));
    }
    if module.is_empty() {
        return Err(Error::InvalidParameter("module has no nodes".into()));
    }

    let (work, filter_margin) = match band {
        Some((lo, hi)) => {
            let b = bandpass(signal, lo, hi)?;
            (b.signal, b.margin)
        }
        None => (signal.clone(), 0),
    };
    let needs_analytic = graph_kind == GraphKind::Pli
        || matches!(
            function,
            NodeFunctionKind::EnvelopeSquaredDifference
                | NodeFunctionKind::EnvelopeInstantaneousCorrelation
                | NodeFunctionKind::PhaseSign
        );
    let analytic: Option<AnalyticDecomposition> = if needs_analytic { Some(analytic_signal(&work)?) } else { None };
    let margin = filter_margin + analytic.as_ref().map_or(0, |a| a.margin);

    let p = signal.samples();
    let first = scheme.start_offset.max(margin);
    let last = p.saturating_sub(margin);
    let epochs = if last > first { (last - first) / scheme.tau } else { 0 };
    if epochs == 0 {
        return Err(Error::TooShort { needed: first + scheme.tau + margin, got: p });
    }

    let windows = scheme.windows_per_epoch();
    let mut values = Array2::zeros((epochs, windows));
    let mut epoch_starts = Vec::with_capacity(epochs);
    let mut graphs = Vec::with_capacity(epochs);
    for e in 0..epochs {
        let start = first + e * scheme.tau;
        let end = start + scheme.tau;
        let epoch_signal = work.epoch(start, end)?;
        let graph = match graph_kind {
            GraphKind::Correlation => correlation_matrix(&work, start..end)?.graph,
            GraphKind::Coherence => {
                let (lo, hi) = band.expect("checked above");
                coherence_matrix(&signal.epoch(start, end)?, lo, hi)?
            }
            _ => pli_from_phase(analytic.as_ref().expect("analytic computed for PLI").phase.view(), start..end)?,
        };
        let slice = |a: &Array2<f64>| a.slice(s![.., start..end]).to_owned();
        let nf = match function {
            NodeFunctionKind::SquaredDifference => NodeFunction::SquaredDifference,
            NodeFunctionKind::InstantaneousCorrelation => {
                NodeFunction::InstantaneousCorrelation { means: row_means(epoch_signal.data()) }
            }
            NodeFunctionKind::EnvelopeSquaredDifference => {
                NodeFunction::EnvelopeSquaredDifference { envelope: slice(&analytic.as_ref().unwrap().envelope) }
            }
            NodeFunctionKind::EnvelopeInstantaneousCorrelation => {
                let envelope = slice(&analytic.as_ref().unwrap().envelope);
                let means = row_means(envelope.view());
                NodeFunction::EnvelopeInstantaneousCorrelation { envelope, means }
            }
            NodeFunctionKind::PhaseSign => NodeFunction::PhaseSign { phase: slice(&analytic.as_ref().unwrap().phase) },
            NodeFunctionKind::PairAverage => NodeFunction::PairAverage,
        };
        let prepared = nf.prepare(&epoch_signal)?;
        for w in 0..windows {
            let range = w * scheme.t_window..(w + 1) * scheme.t_window;
            values[[e, w]] = modular_mean(&prepared, graph.weights(), module, range);
        }
        epoch_starts.push(start);
        graphs.push(graph);
    }
    Ok(WindowedGvd { values, epoch_starts, margin, graphs })
}
