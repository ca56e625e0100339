use std::f64::consts::PI;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::signal::MultivariateSignal;

/// Linear-phase band-pass FIR: Hamming-windowed sinc of even order
/// 4·fs/low, normalised to unit gain at the band centre.
#[derive(Debug, Clone, PartialEq)]
pub struct FirBandpass {
    taps: Vec<f64>,
    low_hz: f64,
    high_hz: f64,
    sample_rate: f64,
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

impl FirBandpass {
    pub fn design(low_hz: f64, high_hz: f64, sample_rate: f64) -> Result<Self> {
        let nyquist = sample_rate / 2.0;
        if !(low_hz > 0.0 && low_hz < high_hz && high_hz < nyquist) {
            return Err(Error::InvalidBand(format!(
                "need 0 < low < high < {nyquist} Hz, got {low_hz}..{high_hz}"
            )));
        }
        let mut order = (4.0 * sample_rate / low_hz).round() as usize;
        if order % 2 == 1 {
            order += 1;
        }
        let order = order.max(2);
        let half = order as f64 / 2.0;
        let (f1, f2) = (low_hz / sample_rate, high_hz / sample_rate);
        let mut taps: Vec<f64> = (0..=order)
            .map(|k| {
                let m = k as f64 - half;
                let ideal = 2.0 * f2 * sinc(2.0 * f2 * m) - 2.0 * f1 * sinc(2.0 * f1 * m);
                let window = 0.54 - 0.46 * (2.0 * PI * k as f64 / order as f64).cos();
                ideal * window
            })
            .collect();
        let mut filter = Self { taps: Vec::new(), low_hz, high_hz, sample_rate };
        let gain = {
            filter.taps = taps.clone();
            filter.gain_at(0.5 * (low_hz + high_hz))
        };
        taps.iter_mut().for_each(|h| *h /= gain);
        filter.taps = taps;
        Ok(filter)
    }

    pub fn order(&self) -> usize {
        self.taps.len() - 1
    }

    /// Group delay in samples; also the unreliable margin at each end.
    pub fn half_order(&self) -> usize {
        self.order() / 2
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn band(&self) -> (f64, f64) {
        (self.low_hz, self.high_hz)
    }

    /// Magnitude response at `freq_hz`. The taps are symmetric, so the
    /// delay-compensated response is real.
    pub fn gain_at(&self, freq_hz: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / self.sample_rate;
        let half = self.half_order() as f64;
        self.taps
            .iter()
            .enumerate()
            .map(|(k, h)| h * (w * (k as f64 - half)).cos())
            .sum::<f64>()
            .abs()
    }

    /// Filters one row with delay compensation; samples outside the row are zero.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let p = x.len() as isize;
        let half = self.half_order() as isize;
        (0..p)
            .map(|t| {
                let mut acc = 0.0;
                for (k, h) in self.taps.iter().enumerate() {
                    let idx = t + half - k as isize;
                    if (0..p).contains(&idx) {
                        acc += h * x[idx as usize];
                    }
                }
                acc
            })
            .collect()
    }
}

/// Band-passed signal and the number of unreliable samples at each end.
#[derive(Debug, Clone)]
pub struct Bandpassed {
    pub signal: MultivariateSignal,
    pub margin: usize,
}

/// Zero-phase band-pass of every node.
pub fn bandpass(signal: &MultivariateSignal, low_hz: f64, high_hz: f64) -> Result<Bandpassed> {
    let filter = FirBandpass::design(low_hz, high_hz, signal.sample_rate())?;
    let (n, p) = (signal.nodes(), signal.samples());
    let mut out = Array2::zeros((n, p));
    for i in 0..n {
        let y = filter.apply(&signal.row(i).to_vec());
        out.row_mut(i).assign(&ndarray::Array1::from(y));
    }
    Ok(Bandpassed { signal: signal.with_data(out)?, margin: filter.half_order() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn design_order_and_band_checks() {
        let f = FirBandpass::design(8.0, 13.0, 200.0).unwrap();
        assert_eq!(f.order(), 100);
        assert_eq!(f.half_order(), 50);
        assert!((f.gain_at(10.5) - 1.0).abs() < 1e-12);
        for (lo, hi) in [(0.0, 10.0), (10.0, 8.0), (8.0, 100.0), (-1.0, 5.0)] {
            assert!(FirBandpass::design(lo, hi, 200.0).is_err(), "{lo}..{hi}");
        }
    }

    #[test]
    fn taps_are_symmetric() {
        let f = FirBandpass::design(8.0, 13.0, 200.0).unwrap();
        let t = f.taps();
        for k in 0..t.len() {
            assert!((t[k] - t[t.len() - 1 - k]).abs() < 1e-15);
        }
    }

    #[test]
    fn stopband_one_octave_out() {
        let f = FirBandpass::design(8.0, 13.0, 200.0).unwrap();
        for freq in [0.0, 1.0, 2.0, 3.0, 4.0, 26.0, 30.0, 50.0, 99.0] {
            let db = 20.0 * f.gain_at(freq).log10();
            assert!(db <= -40.0, "{freq} Hz: {db} dB");
        }
    }

    #[test]
    fn passband_core_ripple() {
        // within ±1 Hz of the centre the response stays inside 1 dB
        let f = FirBandpass::design(8.0, 13.0, 200.0).unwrap();
        for k in 0..=20 {
            let freq = 9.5 + 0.1 * k as f64;
            let db = 20.0 * f.gain_at(freq).log10();
            assert!(db.abs() <= 1.0, "{freq} Hz: {db} dB");
        }
    }
}
