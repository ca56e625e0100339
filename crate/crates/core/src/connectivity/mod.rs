//! Long-term connectivity graphs and graph-variate dynamic (GVD) connectivity.

mod gvd;
mod matrices;
mod window;

pub use gvd::{gvd, modular_connectivity, GvdDelta, GvdResult};
pub use matrices::{coherence_matrix, correlation_matrix, pli_from_phase, pli_matrix, CorrelationEstimate};
pub use window::{windowed_gvd, WindowScheme, WindowedGvd};
