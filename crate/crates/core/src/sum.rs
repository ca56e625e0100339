//! Pairwise (cascade) summation.
//!
//! Rounding error grows as O(log n) instead of O(n) for the naive loop,
//! which matters for the long time-direction reductions (p ~ 10^4).

const BLOCK: usize = 32;

/// Pairwise sum of a slice.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= BLOCK {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise sum of an iterator; collects into a scratch buffer first.
pub fn pairwise_sum_iter<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let buf: Vec<f64> = values.into_iter().collect();
    pairwise_sum(&buf)
}

/// Arithmetic mean using pairwise summation. Returns NaN on empty input.
pub fn mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}

/// Unbiased sample variance (denominator n-1) via a two-pass algorithm.
pub fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    pairwise_sum_iter(values.iter().map(|v| (v - m) * (v - m))) / (values.len() as f64 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_on_small_input() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 55.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn stable_on_long_input() {
        // 0.1 is not representable; naive summation drifts by ~1e-9 at this length
        let v = vec![0.1; 1_000_000];
        assert!((pairwise_sum(&v) - 100_000.0).abs() < 1e-8);
    }

    #[test]
    fn variance_of_known_sample() {
        assert!((sample_variance(&[1.0, 2.0, 3.0, 4.0]) - 5.0 / 3.0).abs() < 1e-15);
    }
}
