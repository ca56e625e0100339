//! Graph-signal-processing baseline filters: Ŵ = I + W, L = D − W, their
//! cubes, and heat kernels exp(−τL).

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::signal::MultivariateSignal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    AdjacencySelfLoops,
    Laplacian,
    AdjacencyCubed,
    LaplacianCubed,
    HeatKernel(f64),
}

impl OperatorKind {
    pub fn label(&self) -> String {
        match self {
            OperatorKind::AdjacencySelfLoops => "W_hat".into(),
            OperatorKind::Laplacian => "L".into(),
            OperatorKind::AdjacencyCubed => "W_hat3".into(),
            OperatorKind::LaplacianCubed => "L3".into(),
            OperatorKind::HeatKernel(tau) => format!("heat_{tau}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphOperator {
    pub matrix: Array2<f64>,
    pub kind: OperatorKind,
}

fn adjacency_self_loops(graph: &WeightedGraph) -> Array2<f64> {
    let mut m = graph.weights().to_owned();
    m.diag_mut().mapv_inplace(|d| d + 1.0);
    m
}

fn cube(m: &Array2<f64>) -> Array2<f64> {
    m.dot(m).dot(m)
}

/// Eigendecomposition L = U Λ Uᵀ, reused for any number of heat-kernel scales.
#[derive(Debug, Clone)]
pub struct LaplacianSpectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Array2<f64>,
}

impl LaplacianSpectrum {
    pub fn new(graph: &WeightedGraph) -> Self {
        let l = graph.laplacian();
        let n = l.nrows();
        let eig = SymmetricEigen::new(DMatrix::from_fn(n, n, |i, j| l[[i, j]]));
        let eigenvectors = Array2::from_shape_fn((n, n), |(i, j)| eig.eigenvectors[(i, j)]);
        Self { eigenvalues: eig.eigenvalues.iter().copied().collect(), eigenvectors }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// U exp(−τΛ) Uᵀ, symmetrised to remove rounding asymmetry.
    pub fn heat_kernel(&self, tau: f64) -> Array2<f64> {
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for (mut col, &lambda) in scaled.columns_mut().into_iter().zip(&self.eigenvalues) {
            col *= (-tau * lambda).exp();
        }
        let k = scaled.dot(&u.t());
        0.5 * (&k + &k.t())
    }
}

/// Builds one baseline operator. For several heat kernels on the same graph,
/// prefer [`LaplacianSpectrum`] to share the eigendecomposition.
pub fn build_operator(graph: &WeightedGraph, kind: OperatorKind) -> Result<GraphOperator> {
    let matrix = match kind {
        OperatorKind::AdjacencySelfLoops => adjacency_self_loops(graph),
        OperatorKind::Laplacian => graph.laplacian(),
        OperatorKind::AdjacencyCubed => cube(&adjacency_self_loops(graph)),
        OperatorKind::LaplacianCubed => cube(&graph.laplacian()),
        OperatorKind::HeatKernel(tau) => {
            if !tau.is_finite() || tau < 0.0 {
                return Err(Error::InvalidParameter(format!("heat-kernel scale must be ≥ 0, got {tau}")));
            }
            if tau == 0.0 {
                Array2::eye(graph.nodes())
            } else {
                LaplacianSpectrum::new(graph).heat_kernel(tau)
            }
        }
    };
    Ok(GraphOperator { matrix, kind })
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: ArrayView1<'_, f64>) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

impl GraphOperator {
    pub fn nodes(&self) -> usize {
        self.matrix.nrows()
    }

    /// op · X for every sample.
    pub fn filter_signal(&self, signal: &MultivariateSignal) -> Result<Array2<f64>> {
        if signal.nodes() != self.nodes() {
            return Err(Error::DimensionMismatch(format!(
                "operator is {n}×{n}, signal has {} nodes",
                signal.nodes(),
                n = self.nodes()
            )));
        }
        Ok(self.matrix.dot(&signal.data()))
    }

    /// Argmax of op · X(:, t) for every t.
    pub fn argmax_all(&self, signal: &MultivariateSignal) -> Result<Vec<usize>> {
        let filtered = self.filter_signal(signal)?;
        Ok(filtered.columns().into_iter().map(argmax).collect())
    }
}

/// Argmax of op · X(:, t), lowest index on ties.
pub fn filter_and_argmax(op: &GraphOperator, signal: &MultivariateSignal, t: usize) -> Result<usize> {
    if t >= signal.samples() {
        return Err(Error::OutOfRange(format!("sample {t} outside 0..{}", signal.samples())));
    }
    if signal.nodes() != op.nodes() {
        return Err(Error::DimensionMismatch(format!("operator has {} nodes, signal {}", op.nodes(), signal.nodes())));
    }
    let scores: Array1<f64> = op.matrix.dot(&signal.column(t));
    Ok(argmax(scores.view()))
}
