use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::rng::{stream, TAG_MOMENT};
use crate::error::{Error, Result};
use crate::sum::{mean, sample_variance};

pub const MIN_MOMENT_SAMPLES: usize = 10_000;

/// Monte-Carlo mean of (xᵢ + xⱼ)(xⱼ + x_k)(x_k + xᵢ) for i.i.d. xᵢ ~ N(δ, σ²),
/// next to three closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub delta: f64,
    pub sigma: f64,
    pub samples: usize,
    pub empirical_mean: f64,
    pub standard_error: f64,
    /// 24σ²δ + 40δ³
    pub printed_closed_form: f64,
    /// 8(μ₃ + 3μ(σ² + μ²) + 2μ³) with μ₃ = E[x³] = μ³ + 3μσ²
    pub single_variable_expansion: f64,
    /// Expansion over independent draws: 2E[x]³ + 6E[x]E[x²] = 8δ³ + 6δσ²
    pub independent_expansion: f64,
}

impl MomentCheck {
    /// |empirical − reference| in standard errors.
    pub fn z_score(&self, reference: f64) -> f64 {
        if self.standard_error == 0.0 {
            if self.empirical_mean == reference {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.empirical_mean - reference).abs() / self.standard_error
        }
    }
}

pub fn triple_product_moment_check(delta: f64, sigma: f64, samples: usize, seed: u64) -> Result<MomentCheck> {
    if samples < MIN_MOMENT_SAMPLES {
        return Err(Error::TooShort { needed: MIN_MOMENT_SAMPLES, got: samples });
    }
    let normal = Normal::new(delta, sigma)
        .map_err(|e| Error::InvalidParameter(format!("N({delta}, {sigma}²): {e}")))?;
    let mut rng = stream(seed, &[TAG_MOMENT, delta.to_bits(), sigma.to_bits()]);
    let products: Vec<f64> = (0..samples)
        .map(|_| {
            let (a, b, c) = (normal.sample(&mut rng), normal.sample(&mut rng), normal.sample(&mut rng));
            (a + b) * (b + c) * (c + a)
        })
        .collect();
    let (mu, s2) = (delta, sigma * sigma);
    let third = mu.powi(3) + 3.0 * mu * s2;
    Ok(MomentCheck {
        delta,
        sigma,
        samples,
        empirical_mean: mean(&products),
        standard_error: (sample_variance(&products) / samples as f64).sqrt(),
        printed_closed_form: 24.0 * s2 * delta + 40.0 * delta.powi(3),
        single_variable_expansion: 8.0 * (third + 3.0 * mu * (s2 + mu * mu) + 2.0 * mu.powi(3)),
        independent_expansion: 2.0 * mu.powi(3) + 6.0 * mu * (s2 + mu * mu),
    })
}
