use std::f64::consts::PI;

use ndarray::{Array1, Array2, Array3};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::MultivariateSignal;
use crate::sum::pairwise_sum;

/// Shortest Welch segment accepted.
pub const MIN_SEGMENT: usize = 8;

/// Welch-averaged one-sided auto and cross spectral densities.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    /// Bin centres in Hz, 0 ..= fs/2.
    pub frequencies: Array1<f64>,
    /// n × bins, P_ii(f) ≥ 0.
    pub auto: Array2<f64>,
    /// n × n × bins, P_ij(f) = E[conj(X_i) X_j]; conjugate-symmetric in (i, j).
    pub cross: Array3<Complex64>,
}

impl SpectralDensity {
    pub fn bins(&self) -> usize {
        self.frequencies.len()
    }

    /// |P_ij|² / (P_ii P_jj) per bin; bins where either auto-spectrum vanishes give 0.
    pub fn magnitude_squared_coherence(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.bins())
            .map(|k| {
                let denom = self.auto[[i, k]] * self.auto[[j, k]];
                if denom > 0.0 {
                    (self.cross[[i, j, k]].norm_sqr() / denom).min(1.0)
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Indices of the bins whose centre lies in [low_hz, high_hz].
    pub fn band_bins(&self, low_hz: f64, high_hz: f64) -> Vec<usize> {
        self.frequencies
            .iter()
            .enumerate()
            .filter(|(_, &f)| f >= low_hz && f <= high_hz)
            .map(|(k, _)| k)
            .collect()
    }
}

/// min(256, ⌊p/4⌋) rounded down to a power of two.
pub fn welch_segment_length(samples: usize) -> usize {
    let target = (samples / 4).min(256);
    if target == 0 {
        0
    } else {
        1 << (usize::BITS - 1 - target.leading_zeros())
    }
}

fn hann_periodic(len: usize) -> Vec<f64> {
    (0..len).map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / len as f64).cos()).collect()
}

/// Hann-windowed, 50%-overlap Welch estimate with per-segment mean removal
/// and density scaling.
pub fn welch_spectra(signal: &MultivariateSignal) -> Result<SpectralDensity> {
    let (n, p) = (signal.nodes(), signal.samples());
    let seg = welch_segment_length(p);
    if seg < MIN_SEGMENT {
        return Err(Error::TooShort { needed: 4 * MIN_SEGMENT, got: p });
    }
    let step = seg / 2;
    let segments = (p - seg) / step + 1;
    let bins = seg / 2 + 1;
    let fs = signal.sample_rate();
    let window = hann_periodic(seg);
    let window_power = pairwise_sum(&window.iter().map(|w| w * w).collect::<Vec<_>>());
    let fft = FftPlanner::new().plan_fft_forward(seg);

    let mut cross = Array3::<Complex64>::zeros((n, n, bins));
    let mut spectra = vec![vec![Complex64::new(0.0, 0.0); seg]; n];
    for s in 0..segments {
        let start = s * step;
        for (i, buf) in spectra.iter_mut().enumerate() {
            let row = signal.row(i);
            let chunk: Vec<f64> = (start..start + seg).map(|t| row[t]).collect();
            let m = pairwise_sum(&chunk) / seg as f64;
            for (k, c) in buf.iter_mut().enumerate() {
                *c = Complex64::new((chunk[k] - m) * window[k], 0.0);
            }
            fft.process(buf);
        }
        for i in 0..n {
            for j in i..n {
                for k in 0..bins {
                    cross[[i, j, k]] += spectra[i][k].conj() * spectra[j][k];
                }
            }
        }
    }

    let base = 1.0 / (fs * window_power * segments as f64);
    for k in 0..bins {
        // one-sided: double everything except DC and (even-length) Nyquist
        let scale = if k == 0 || (seg % 2 == 0 && k == seg / 2) { base } else { 2.0 * base };
        for i in 0..n {
            for j in i..n {
                let v = cross[[i, j, k]] * scale;
                cross[[i, j, k]] = v;
                cross[[j, i, k]] = v.conj();
            }
            cross[[i, i, k]].im = 0.0;
        }
    }
    let auto = Array2::from_shape_fn((n, bins), |(i, k)| cross[[i, i, k]].re.max(0.0));
    let frequencies = Array1::from_shape_fn(bins, |k| k as f64 * fs / seg as f64);
    Ok(SpectralDensity { frequencies, auto, cross })
}
