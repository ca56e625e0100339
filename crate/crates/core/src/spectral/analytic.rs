use std::f64::consts::PI;

use ndarray::Array2;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::MultivariateSignal;

/// Shortest signal accepted by [`analytic_signal`].
pub const MIN_ANALYTIC_SAMPLES: usize = 8;

/// Samples at each end contaminated by the circular Hilbert transform (5% of p).
pub fn hilbert_margin(samples: usize) -> usize {
    (samples as f64 * 0.05).ceil() as usize
}

/// Instantaneous amplitude and phase of every node.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticDecomposition {
    /// sᵃᵢ(t) ≥ 0
    pub envelope: Array2<f64>,
    /// φᵢ(t) in (−π, π]; 0 wherever the envelope vanishes
    pub phase: Array2<f64>,
    /// Unreliable samples at each end.
    pub margin: usize,
}

/// Analytic signal of one row via a full-length FFT: keep DC and Nyquist,
/// double positive frequencies, zero negative ones.
pub fn analytic_row(x: &[f64], planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
    let n = x.len();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    for (k, c) in buf.iter_mut().enumerate() {
        let gain = if k == 0 || (n % 2 == 0 && k == half) {
            1.0
        } else if k < n.div_ceil(2) {
            2.0
        } else {
            0.0
        };
        *c *= gain;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Envelope and wrapped phase of each node's analytic representation.
pub fn analytic_signal(signal: &MultivariateSignal) -> Result<AnalyticDecomposition> {
    let (n, p) = (signal.nodes(), signal.samples());
    if p < MIN_ANALYTIC_SAMPLES {
        return Err(Error::TooShort { needed: MIN_ANALYTIC_SAMPLES, got: p });
    }
    let mut planner = FftPlanner::new();
    let mut envelope = Array2::zeros((n, p));
    let mut phase = Array2::zeros((n, p));
    for i in 0..n {
        let row = signal.row(i).to_vec();
        for (t, z) in analytic_row(&row, &mut planner).into_iter().enumerate() {
            let amp = z.norm();
            envelope[[i, t]] = amp;
            phase[[i, t]] = if amp == 0.0 {
                0.0
            } else {
                let a = z.im.atan2(z.re);
                if a <= -PI { PI } else { a }
            };
        }
    }
    Ok(AnalyticDecomposition { envelope, phase, margin: hilbert_margin(p) })
}
