use std::ops::Range;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::graph::{GraphKind, WeightedGraph};
use crate::node_function::{NodeFunction, NodeFunctionKind, PreparedFunction};
use crate::signal::MultivariateSignal;
use crate::sum::pairwise_sum;

/// Node GVD connectivity θᵢ(X, t) = Σⱼ c_ij F(xᵢ(t), xⱼ(t)).
#[derive(Debug, Clone, PartialEq)]
pub struct GvdResult {
    /// n × p
    pub node_values: Array2<f64>,
    pub kind: NodeFunctionKind,
    pub graph_kind: GraphKind,
    /// Samples at each end inherited from filtering / Hilbert steps.
    pub unreliable_margin: usize,
    pub warnings: Vec<String>,
}

impl GvdResult {
    pub fn with_margin(mut self, margin: usize) -> Self {
        self.unreliable_margin = margin;
        self
    }

    /// Σᵢ θᵢ(X, t) for every t.
    pub fn global(&self) -> Vec<f64> {
        self.node_values.columns().into_iter().map(|c| pairwise_sum(&c.to_vec())).collect()
    }
}

fn compatibility_warnings(kind: NodeFunctionKind, graph_kind: GraphKind) -> Vec<String> {
    let mut warnings = Vec::new();
    let phase_fn = kind == NodeFunctionKind::PhaseSign;
    match graph_kind {
        GraphKind::Correlation | GraphKind::Coherence if phase_fn => warnings.push(format!(
            "phase_sign node function weighted by a {graph_kind:?} graph; a PLI graph is the matching estimator"
        )),
        GraphKind::Pli if !phase_fn => {
            warnings.push(format!("{} node function weighted by a PLI graph", kind.name()))
        }
        _ => {}
    }
    warnings
}

fn check_nodes(graph: &WeightedGraph, n: usize) -> Result<()> {
    if graph.nodes() != n {
        return Err(Error::DimensionMismatch(format!("graph has {} nodes, signal has {n}", graph.nodes())));
    }
    Ok(())
}

/// θᵢ(t) for the rows in `nodes` at sample `t`, written into `out`.
fn node_values_at(
    prepared: &PreparedFunction,
    w: ArrayView2<'_, f64>,
    t: usize,
    nodes: impl Iterator<Item = usize>,
    terms: &mut [f64],
    mut out: impl FnMut(usize, f64),
) {
    let v = prepared.series();
    let op = prepared.op();
    let col = v.column(t);
    for i in nodes {
        let xi = col[i];
        for (j, term) in terms.iter_mut().enumerate() {
            *term = if i == j { 0.0 } else { w[[i, j]] * op.apply(xi, col[j]) };
        }
        out(i, pairwise_sum(terms));
    }
}

/// Node GVD connectivity of every node at every sample.
///
/// Node-function statistics (means, envelopes, phases) are taken from
/// `function` as given; callers compute them over the same epoch as the graph.
pub fn gvd(signal: &MultivariateSignal, graph: &WeightedGraph, function: &NodeFunction) -> Result<GvdResult> {
    let (n, p) = (signal.nodes(), signal.samples());
    check_nodes(graph, n)?;
    let prepared = function.prepare(signal)?;
    let w = graph.weights();
    let mut node_values = Array2::zeros((n, p));
    let mut terms = vec![0.0; n];
    for t in 0..p {
        node_values_at(&prepared, w, t, 0..n, &mut terms, |i, v| node_values[[i, t]] = v);
    }
    Ok(GvdResult {
        node_values,
        kind: function.kind(),
        graph_kind: graph.kind(),
        unreliable_margin: 0,
        warnings: compatibility_warnings(function.kind(), graph.kind()),
    })
}

/// Modular connectivity: (1/|T|) Σ_{t∈T} Σ_{i∈module} Σⱼ c_ij F(xᵢ(t), xⱼ(t)).
pub fn modular_connectivity(
    signal: &MultivariateSignal,
    graph: &WeightedGraph,
    function: &NodeFunction,
    module: &[usize],
    epoch: Range<usize>,
) -> Result<f64> {
    let (n, p) = (signal.nodes(), signal.samples());
    check_nodes(graph, n)?;
    if module.is_empty() {
        return Err(Error::InvalidParameter("module has no nodes".into()));
    }
    if let Some(&bad) = module.iter().find(|&&i| i >= n) {
        return Err(Error::OutOfRange(format!("module node {bad} outside 0..{n}")));
    }
    if epoch.start >= epoch.end || epoch.end > p {
        return Err(Error::OutOfRange(format!("epoch {epoch:?} outside 0..{p}")));
    }
    let prepared = function.prepare(signal)?;
    Ok(modular_mean(&prepared, graph.weights(), module, epoch))
}

pub(crate) fn modular_mean(
    prepared: &PreparedFunction,
    w: ArrayView2<'_, f64>,
    module: &[usize],
    epoch: Range<usize>,
) -> f64 {
    let mut terms = vec![0.0; prepared.nodes()];
    let mut module_terms = vec![0.0; module.len()];
    let per_sample: Vec<f64> = epoch
        .clone()
        .map(|t| {
            let mut k = 0;
            node_values_at(prepared, w, t, module.iter().copied(), &mut terms, |_, v| {
                module_terms[k] = v;
                k += 1;
            });
            pairwise_sum(&module_terms)
        })
        .collect();
    pairwise_sum(&per_sample) / epoch.len() as f64
}

/// Δ = C ∘ J evaluated one slice at a time.
#[derive(Debug, Clone)]
pub struct GvdDelta {
    prepared: PreparedFunction,
    graph: WeightedGraph,
}

impl GvdDelta {
    pub fn new(signal: &MultivariateSignal, graph: &WeightedGraph, function: &NodeFunction) -> Result<Self> {
        check_nodes(graph, signal.nodes())?;
        Ok(Self { prepared: function.prepare(signal)?, graph: graph.clone() })
    }

    pub fn samples(&self) -> usize {
        self.prepared.samples()
    }

    /// θ(xᵢ, xⱼ, t) for all pairs at sample t.
    pub fn slice(&self, t: usize) -> Array2<f64> {
        let mut s = self.prepared.slice(t);
        s *= &self.graph.weights();
        s
    }

    pub fn iter(&self) -> impl Iterator<Item = Array2<f64>> + '_ {
        (0..self.samples()).map(move |t| self.slice(t))
    }
}
