//! Undirected weighted graphs over the node set of a multivariate signal.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::MultivariateSignal;
use crate::sum::pairwise_sum_iter;

/// Where the weights came from. Connectivity kinds constrain the weight range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Generic,
    Correlation,
    Coherence,
    Pli,
    Spatial,
}

impl GraphKind {
    fn range(self) -> Option<(f64, f64)> {
        match self {
            GraphKind::Correlation => Some((-1.0, 1.0)),
            GraphKind::Coherence | GraphKind::Pli => Some((0.0, 1.0)),
            GraphKind::Generic | GraphKind::Spatial => None,
        }
    }
}

const SYMMETRY_TOL: f64 = 1e-12;
const RANGE_TOL: f64 = 1e-12;

/// Symmetric n×n weight matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    weights: Array2<f64>,
    kind: GraphKind,
}

impl WeightedGraph {
    /// Validates symmetry, zero diagonal and the kind's weight range.
    ///
    /// Asymmetries below 1e-12 (relative) are averaged away and range
    /// excursions below 1e-12 are clamped, so rounding noise from the
    /// estimators does not reject a graph.
    pub fn new(weights: Array2<f64>, kind: GraphKind) -> Result<Self> {
        let (r, c) = weights.dim();
        if r != c {
            return Err(Error::InvalidGraph(format!("weight matrix is {r}×{c}, not square")));
        }
        if r < 2 {
            return Err(Error::InvalidGraph("need at least 2 nodes".into()));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidGraph("non-finite weight".into()));
        }
        for i in 0..r {
            if weights[[i, i]] != 0.0 {
                return Err(Error::InvalidGraph(format!("nonzero diagonal at node {i}")));
            }
        }
        let mut w = weights;
        for i in 0..r {
            for j in (i + 1)..r {
                let (a, b) = (w[[i, j]], w[[j, i]]);
                if (a - b).abs() > SYMMETRY_TOL * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::InvalidGraph(format!("asymmetric weights at ({i},{j}): {a} vs {b}")));
                }
                let m = 0.5 * (a + b);
                w[[i, j]] = m;
                w[[j, i]] = m;
            }
        }
        if let Some((lo, hi)) = kind.range() {
            for v in w.iter_mut() {
                if *v < lo - RANGE_TOL || *v > hi + RANGE_TOL {
                    return Err(Error::InvalidGraph(format!("{kind:?} weight {v} outside [{lo}, {hi}]")));
                }
                *v = v.clamp(lo, hi);
            }
        }
        Ok(Self { weights: w, kind })
    }

    /// Like [`WeightedGraph::new`] but overwrites the diagonal with zeros first.
    pub fn with_zeroed_diagonal(mut weights: Array2<f64>, kind: GraphKind) -> Result<Self> {
        if weights.is_square() {
            weights.diag_mut().fill(0.0);
        }
        Self::new(weights, kind)
    }

    /// Graph with no edges.
    pub fn empty(n: usize, kind: GraphKind) -> Result<Self> {
        Self::new(Array2::zeros((n, n)), kind)
    }

    pub fn nodes(&self) -> usize {
        self.weights.nrows()
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn weights(&self) -> ArrayView2<'_, f64> {
        self.weights.view()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[[i, j]]
    }

    /// Weighted degrees (row sums).
    pub fn degrees(&self) -> Array1<f64> {
        self.weights.rows().into_iter().map(|r| pairwise_sum_iter(r.iter().copied())).collect()
    }

    /// Combinatorial Laplacian L = D − W.
    pub fn laplacian(&self) -> Array2<f64> {
        let mut l = -&self.weights;
        for (i, d) in self.degrees().iter().enumerate() {
            l[[i, i]] = *d;
        }
        l
    }

    /// αW₁ + βW₂, tagged generic. Both graphs must have the same size.
    pub fn linear_combination(alpha: f64, a: &Self, beta: f64, b: &Self) -> Result<Self> {
        if a.nodes() != b.nodes() {
            return Err(Error::DimensionMismatch(format!("{} vs {} nodes", a.nodes(), b.nodes())));
        }
        Self::new(alpha * &a.weights + beta * &b.weights, GraphKind::Generic)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.nodes() {
            return Err(Error::DimensionMismatch(format!(
                "graph has {} nodes, vector has {len} entries",
                self.nodes()
            )));
        }
        Ok(())
    }
}

/// Dirichlet energy ½ Σᵢⱼ wᵢⱼ (xᵢ − xⱼ)² of one graph signal column.
///
/// With the ½ the pair sum equals the Laplacian quadratic form xᵀ(D − W)x.
pub fn dirichlet_energy(graph: &WeightedGraph, column: ArrayView1<'_, f64>) -> Result<f64> {
    graph.check_len(column.len())?;
    let n = graph.nodes();
    let terms = (0..n).flat_map(|i| {
        (0..n).map(move |j| {
            let d = column[i] - column[j];
            graph.weights[[i, j]] * d * d
        })
    });
    Ok(0.5 * pairwise_sum_iter(terms))
}

/// xᵀ L x, the quadratic-form route to the Dirichlet energy.
pub fn laplacian_quadratic_form(graph: &WeightedGraph, column: ArrayView1<'_, f64>) -> Result<f64> {
    graph.check_len(column.len())?;
    let lx = graph.laplacian().dot(&column);
    Ok(pairwise_sum_iter(lx.iter().zip(column.iter()).map(|(a, b)| a * b)))
}

/// A multivariate signal bound to a graph over the same node set.
#[derive(Debug, Clone)]
pub struct GraphVariateSignal {
    signal: MultivariateSignal,
    graph: WeightedGraph,
}

impl GraphVariateSignal {
    pub fn new(signal: MultivariateSignal, graph: WeightedGraph) -> Result<Self> {
        if signal.nodes() != graph.nodes() {
            return Err(Error::DimensionMismatch(format!(
                "signal has {} nodes, graph has {}",
                signal.nodes(),
                graph.nodes()
            )));
        }
        Ok(Self { signal, graph })
    }

    pub fn signal(&self) -> &MultivariateSignal {
        &self.signal
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }
}
