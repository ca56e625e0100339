//! Instantaneous network tensors: one n×n layer per sample.

use ndarray::{Array1, Array2, Array3, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::node_function::{NodeFunction, PreparedFunction};
use crate::signal::MultivariateSignal;
use crate::sum::pairwise_sum;

/// p slices of n×n matrices, stored slice-major with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkTensor {
    slices: Array3<f64>,
}

impl NetworkTensor {
    /// Wraps a (p, n, n) array; fails if any slice has a nonzero diagonal.
    pub fn from_slices(slices: Array3<f64>) -> Result<Self> {
        let (_, r, c) = slices.dim();
        if r != c {
            return Err(Error::DimensionMismatch(format!("slices are {r}×{c}, not square")));
        }
        for (t, slice) in slices.axis_iter(Axis(0)).enumerate() {
            if slice.diag().iter().any(|&v| v != 0.0) {
                return Err(Error::InvalidParameter(format!("slice {t} has a nonzero diagonal")));
            }
        }
        Ok(Self { slices })
    }

    /// J_ijt = f(i, j, t) for i ≠ j and 0 on the diagonal.
    pub fn from_fn(n: usize, p: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let slices = Array3::from_shape_fn((p, n, n), |(t, i, j)| if i == j { 0.0 } else { f(i, j, t) });
        Self { slices }
    }

    pub fn from_prepared(prepared: &PreparedFunction) -> Self {
        let (n, p) = (prepared.nodes(), prepared.samples());
        let mut slices = Array3::zeros((p, n, n));
        for (t, mut slice) in slices.axis_iter_mut(Axis(0)).enumerate() {
            slice.assign(&prepared.slice(t));
        }
        Self { slices }
    }

    pub fn nodes(&self) -> usize {
        self.slices.dim().1
    }

    pub fn samples(&self) -> usize {
        self.slices.dim().0
    }

    pub fn slice(&self, t: usize) -> ArrayView2<'_, f64> {
        self.slices.index_axis(Axis(0), t)
    }

    pub fn get(&self, i: usize, j: usize, t: usize) -> f64 {
        self.slices[[t, i, j]]
    }

    pub fn as_array(&self) -> &Array3<f64> {
        &self.slices
    }

    pub fn iter_slices(&self) -> impl Iterator<Item = ArrayView2<'_, f64>> {
        self.slices.axis_iter(Axis(0))
    }
}

/// J of a signal under a node function: J_ijt = F(xᵢ(t), xⱼ(t)), J_iit = 0.
pub fn node_function_tensor(signal: &MultivariateSignal, function: &NodeFunction) -> Result<NetworkTensor> {
    Ok(NetworkTensor::from_prepared(&function.prepare(signal)?))
}

fn check_graph(graph: &WeightedGraph, n: usize) -> Result<()> {
    if graph.nodes() != n {
        return Err(Error::DimensionMismatch(format!("graph has {} nodes, tensor has {n}", graph.nodes())));
    }
    Ok(())
}

/// Δ_(t) = W ∘ J_(t) for every slice.
pub fn graph_weighted_tensor(graph: &WeightedGraph, j: &NetworkTensor) -> Result<NetworkTensor> {
    check_graph(graph, j.nodes())?;
    let w = graph.weights();
    let mut slices = j.slices.clone();
    for mut slice in slices.axis_iter_mut(Axis(0)) {
        slice *= &w;
    }
    Ok(NetworkTensor { slices })
}

/// Streams Δ_(t) = W ∘ J_(t) one slice at a time without building the tensor.
pub fn weighted_slices<'a>(
    graph: &'a WeightedGraph,
    prepared: &'a PreparedFunction,
) -> Result<impl Iterator<Item = Array2<f64>> + 'a> {
    check_graph(graph, prepared.nodes())?;
    Ok((0..prepared.samples()).map(move |t| {
        let mut slice = prepared.slice(t);
        slice *= &graph.weights();
        slice
    }))
}

/// Signal product W ⋄ J: output(i, t) = Σⱼ wᵢⱼ J_ijt, the row sums of W ∘ J_(t).
///
/// This is the node-level reduction: with F(xᵢ, xⱼ) = xⱼ it equals W·X,
/// and with F = xᵢ − xⱼ it equals (D − W)·X.
pub fn signal_product(graph: &WeightedGraph, j: &NetworkTensor) -> Result<Array2<f64>> {
    check_graph(graph, j.nodes())?;
    let (n, p) = (j.nodes(), j.samples());
    let w = graph.weights();
    let mut out = Array2::zeros((n, p));
    let mut terms = vec![0.0; n];
    for (t, slice) in j.iter_slices().enumerate() {
        for i in 0..n {
            for (k, term) in terms.iter_mut().enumerate() {
                *term = w[[i, k]] * slice[[i, k]];
            }
            out[[i, t]] = pairwise_sum(&terms);
        }
    }
    Ok(out)
}

/// Column form of the signal product: output(i, t) = Σⱼ wᵢⱼ J_jit, row i of W
/// dotted with column i of J_(t). Agrees with [`signal_product`] when every
/// slice is symmetric and flips sign when every slice is antisymmetric.
pub fn signal_product_columnwise(graph: &WeightedGraph, j: &NetworkTensor) -> Result<Array2<f64>> {
    check_graph(graph, j.nodes())?;
    let (n, p) = (j.nodes(), j.samples());
    let w = graph.weights();
    let mut out = Array2::zeros((n, p));
    let mut terms = vec![0.0; n];
    for (t, slice) in j.iter_slices().enumerate() {
        for i in 0..n {
            for (k, term) in terms.iter_mut().enumerate() {
                *term = w[[i, k]] * slice[[k, i]];
            }
            out[[i, t]] = pairwise_sum(&terms);
        }
    }
    Ok(out)
}

/// Diagonal of Δ³ for a single n×n layer.
pub fn local_clustering_slice(delta: ArrayView2<'_, f64>) -> Array1<f64> {
    let squared = delta.dot(&delta);
    let n = delta.nrows();
    let mut terms = vec![0.0; n];
    Array1::from_shape_fn(n, |i| {
        for (k, term) in terms.iter_mut().enumerate() {
            *term = delta[[i, k]] * squared[[k, i]];
        }
        pairwise_sum(&terms)
    })
}

/// Local clustering C_loc(i, t) = (Δ_(t)³)ᵢᵢ for every node and sample.
pub fn local_clustering(delta: &NetworkTensor) -> Array2<f64> {
    let (n, p) = (delta.nodes(), delta.samples());
    let mut out = Array2::zeros((n, p));
    for (t, slice) in delta.iter_slices().enumerate() {
        out.column_mut(t).assign(&local_clustering_slice(slice));
    }
    out
}

/// Local clustering over streamed layers; `n` is the node count.
pub fn local_clustering_streaming(n: usize, layers: impl Iterator<Item = Array2<f64>>) -> Array2<f64> {
    let columns: Vec<Array1<f64>> = layers.map(|layer| local_clustering_slice(layer.view())).collect();
    let mut out = Array2::zeros((n, columns.len()));
    for (t, col) in columns.iter().enumerate() {
        out.column_mut(t).assign(col);
    }
    out
}

/// Tolerance for [`proposition1_equivalence_check`].
pub const LINEAR_EQUIVALENCE_TOL: f64 = 1e-9;

/// Checks that the linear node function F = a_ij xᵢ + a_ji xⱼ, reduced by the
/// signal product, coincides with ordinary matrix multiplication by
///
/// ```text
/// F̃(W)ᵢᵢ = Σⱼ a_ij w_ij,   F̃(W)ᵢⱼ = a_ji w_ij  (i ≠ j)
/// ```
///
/// Returns true when F̃(W)·X equals W ⋄ J elementwise within 1e-9.
pub fn proposition1_equivalence_check(
    graph: &WeightedGraph,
    signal: &MultivariateSignal,
    coefficients: ArrayView2<'_, f64>,
) -> Result<bool> {
    let n = signal.nodes();
    check_graph(graph, n)?;
    if coefficients.dim() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "coefficients are {:?}, expected {n}×{n}",
            coefficients.dim()
        )));
    }
    let x = signal.data();
    let w = graph.weights();
    let j = NetworkTensor::from_fn(n, signal.samples(), |i, k, t| {
        coefficients[[i, k]] * x[[i, t]] + coefficients[[k, i]] * x[[k, t]]
    });
    let lhs = signal_product(graph, &j)?;
    let transformed = Array2::from_shape_fn((n, n), |(i, k)| {
        if i == k {
            pairwise_sum(&(0..n).map(|m| coefficients[[i, m]] * w[[i, m]]).collect::<Vec<_>>())
        } else {
            coefficients[[k, i]] * w[[i, k]]
        }
    });
    let rhs = transformed.dot(&x);
    Ok(lhs.iter().zip(rhs.iter()).all(|(a, b)| (a - b).abs() <= LINEAR_EQUIVALENCE_TOL))
}
