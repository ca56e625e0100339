//! Bivariate node-space functions F(xᵢ(t), xⱼ(t)).
//!
//! Each function is reduced to a per-node series (normalised signal,
//! centred signal, envelope, phase, or the raw signal) combined pairwise by
//! a small binary operator. That keeps per-sample evaluation cheap and lets
//! slices of the instantaneous network be streamed one at a time.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{node_normalize, MultivariateSignal};

/// Tag identifying a node function, without its statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeFunctionKind {
    SquaredDifference,
    InstantaneousCorrelation,
    EnvelopeSquaredDifference,
    EnvelopeInstantaneousCorrelation,
    PhaseSign,
    PairAverage,
}

impl NodeFunctionKind {
    pub fn name(self) -> &'static str {
        match self {
            NodeFunctionKind::SquaredDifference => "squared_difference",
            NodeFunctionKind::InstantaneousCorrelation => "instantaneous_correlation",
            NodeFunctionKind::EnvelopeSquaredDifference => "envelope_squared_difference",
            NodeFunctionKind::EnvelopeInstantaneousCorrelation => "envelope_instantaneous_correlation",
            NodeFunctionKind::PhaseSign => "phase_sign",
            NodeFunctionKind::PairAverage => "pair_average",
        }
    }

    /// True when F(a, b) = −F(b, a); all other kinds are symmetric.
    pub fn is_antisymmetric(self) -> bool {
        self == NodeFunctionKind::PhaseSign
    }
}

/// A node function together with the statistics it needs.
///
/// * `InstantaneousCorrelation`: `means` holds x̄ᵢ (length n).
/// * Envelope variants: `envelope` holds sᵃᵢ(t) (n×p); the correlation
///   variant also needs the envelope means s̄ᵃᵢ.
/// * `PhaseSign`: `phase` holds φᵢ(t) (n×p) in radians.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeFunction {
    SquaredDifference,
    InstantaneousCorrelation { means: Array1<f64> },
    EnvelopeSquaredDifference { envelope: Array2<f64> },
    EnvelopeInstantaneousCorrelation { envelope: Array2<f64>, means: Array1<f64> },
    PhaseSign { phase: Array2<f64> },
    PairAverage,
}

/// Binary operator applied to the prepared per-node series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairOp {
    /// (a − b)²
    SquaredDifference,
    /// |a·b|
    AbsProduct,
    /// sgn(sin(a − b)): the sign of the wrapped phase difference, 0 on ties
    PhaseSign,
    /// ½(a + b)
    Average,
}

impl PairOp {
    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            PairOp::SquaredDifference => {
                let d = a - b;
                d * d
            }
            PairOp::AbsProduct => (a * b).abs(),
            PairOp::PhaseSign => phase_sign(a, b),
            PairOp::Average => 0.5 * (a + b),
        }
    }
}

/// Sign of the phase difference a − b taken on the circle, with sgn(0) = 0.
///
/// `sin` is odd in IEEE arithmetic, so the result is exactly antisymmetric.
#[inline]
pub fn phase_sign(a: f64, b: f64) -> f64 {
    let s = (a - b).sin();
    if s > 0.0 {
        1.0
    } else if s < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl NodeFunction {
    pub fn kind(&self) -> NodeFunctionKind {
        match self {
            NodeFunction::SquaredDifference => NodeFunctionKind::SquaredDifference,
            NodeFunction::InstantaneousCorrelation { .. } => NodeFunctionKind::InstantaneousCorrelation,
            NodeFunction::EnvelopeSquaredDifference { .. } => NodeFunctionKind::EnvelopeSquaredDifference,
            NodeFunction::EnvelopeInstantaneousCorrelation { .. } => {
                NodeFunctionKind::EnvelopeInstantaneousCorrelation
            }
            NodeFunction::PhaseSign { .. } => NodeFunctionKind::PhaseSign,
            NodeFunction::PairAverage => NodeFunctionKind::PairAverage,
        }
    }

    /// Instantaneous correlation with node means over samples `start..end`.
    pub fn instantaneous_correlation(signal: &MultivariateSignal, start: usize, end: usize) -> Self {
        NodeFunction::InstantaneousCorrelation { means: signal.node_means(start, end).into() }
    }

    /// Reduces the function to a per-node series and a pair operator.
    pub fn prepare(&self, signal: &MultivariateSignal) -> Result<PreparedFunction> {
        let (n, p) = (signal.nodes(), signal.samples());
        let check_means = |m: &Array1<f64>| {
            if m.len() != n {
                return Err(Error::DimensionMismatch(format!("{} means for {n} nodes", m.len())));
            }
            Ok(())
        };
        let check_series = |a: &Array2<f64>, what: &str| {
            if a.dim() != (n, p) {
                return Err(Error::DimensionMismatch(format!(
                    "{what} is {:?}, signal is {n}×{p}",
                    a.dim()
                )));
            }
            Ok(())
        };
        let centred = |series: ArrayView2<'_, f64>, means: &Array1<f64>| {
            let mut out = series.to_owned();
            for (mut row, m) in out.rows_mut().into_iter().zip(means.iter()) {
                row.mapv_inplace(|v| v - m);
            }
            out
        };
        let (values, op) = match self {
            NodeFunction::SquaredDifference => (node_normalize(signal).into_data(), PairOp::SquaredDifference),
            NodeFunction::InstantaneousCorrelation { means } => {
                check_means(means)?;
                (centred(signal.data(), means), PairOp::AbsProduct)
            }
            NodeFunction::EnvelopeSquaredDifference { envelope } => {
                check_series(envelope, "envelope")?;
                (envelope.clone(), PairOp::SquaredDifference)
            }
            NodeFunction::EnvelopeInstantaneousCorrelation { envelope, means } => {
                check_series(envelope, "envelope")?;
                check_means(means)?;
                (centred(envelope.view(), means), PairOp::AbsProduct)
            }
            NodeFunction::PhaseSign { phase } => {
                check_series(phase, "phase")?;
                (phase.clone(), PairOp::PhaseSign)
            }
            NodeFunction::PairAverage => (signal.data().to_owned(), PairOp::Average),
        };
        Ok(PreparedFunction { values, op, kind: self.kind() })
    }
}

/// Node function ready for evaluation: J_ijt = op(v_i(t), v_j(t)) for i ≠ j.
#[derive(Debug, Clone)]
pub struct PreparedFunction {
    values: Array2<f64>,
    op: PairOp,
    kind: NodeFunctionKind,
}

impl PreparedFunction {
    /// Builds a prepared function from an arbitrary per-node series.
    pub fn from_series(values: Array2<f64>, op: PairOp, kind: NodeFunctionKind) -> Self {
        Self { values, op, kind }
    }

    pub fn nodes(&self) -> usize {
        self.values.nrows()
    }

    pub fn samples(&self) -> usize {
        self.values.ncols()
    }

    pub fn kind(&self) -> NodeFunctionKind {
        self.kind
    }

    pub fn op(&self) -> PairOp {
        self.op
    }

    pub fn series(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    #[inline]
    pub fn evaluate(&self, i: usize, j: usize, t: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.op.apply(self.values[[i, t]], self.values[[j, t]])
        }
    }

    /// The n×n slice J_(t).
    pub fn slice(&self, t: usize) -> Array2<f64> {
        let n = self.nodes();
        let col: Vec<f64> = self.values.column(t).to_vec();
        Array2::from_shape_fn((n, n), |(i, j)| if i == j { 0.0 } else { self.op.apply(col[i], col[j]) })
    }
}
