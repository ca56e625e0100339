//! Graph-variate signal analysis.
//!
//! A multivariate signal X (n nodes × p samples) is paired with a weighted
//! graph W over the same nodes. Instantaneous bivariate node functions
//! J_ijt = F(x_i(t), x_j(t)) are weighted by W to give a per-sample network
//! Δ = W∘J, from which node connectivity, clustering and energies follow.

pub mod connectivity;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod gsp;
pub mod node_function;
pub mod signal;
pub mod spectral;
pub mod stats;
pub mod sum;
pub mod tensor;

pub use error::{Error, Result};
pub use graph::{dirichlet_energy, laplacian_quadratic_form, GraphKind, GraphVariateSignal, WeightedGraph};
pub use node_function::{phase_sign, NodeFunction, NodeFunctionKind, PairOp, PreparedFunction};
pub use signal::{node_normalize, MultivariateSignal};
pub use tensor::{
    graph_weighted_tensor, local_clustering, local_clustering_slice, local_clustering_streaming, node_function_tensor,
    proposition1_equivalence_check, signal_product, signal_product_columnwise, weighted_slices, NetworkTensor,
};
