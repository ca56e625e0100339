//! Spectral primitives: analytic signal, zero-phase band-pass, Welch spectra.

mod analytic;
mod filter;
mod welch;

pub use analytic::{analytic_row, analytic_signal, hilbert_margin, AnalyticDecomposition, MIN_ANALYTIC_SAMPLES};
pub use filter::{bandpass, Bandpassed, FirBandpass};
pub use welch::{welch_segment_length, welch_spectra, SpectralDensity, MIN_SEGMENT};
