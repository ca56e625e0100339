//! Student t tests, Kolmogorov–Smirnov uniformity and exact binomial tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::{mean, sample_variance};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(x) for x > 0 (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + k as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta I_x(a, b).
pub fn betainc(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

/// Two-sided tail probability P(|T| ≥ |t|) of Student's t with `dof` degrees of freedom.
pub fn student_t_two_sided(t: f64, dof: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    betainc(0.5 * dof, 0.5, dof / (dof + t * t)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub statistic: f64,
    /// Two-sided.
    pub p_value: f64,
    pub dof: f64,
    pub mean: f64,
}

impl TTestResult {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// One-sample t test of H₀: population mean = 0.
pub fn one_sample_ttest(values: &[f64]) -> Result<TTestResult> {
    let n = values.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite value in t-test sample".into()));
    }
    let m = mean(values);
    let var = sample_variance(values);
    if !(var > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let statistic = m / (var / n as f64).sqrt();
    let dof = (n - 1) as f64;
    Ok(TTestResult { statistic, p_value: student_t_two_sided(statistic, dof), dof, mean: m })
}

/// Paired t test: the one-sample test on a − b.
pub fn paired_ttest(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!("paired samples of length {} and {}", a.len(), b.len())));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    one_sample_ttest(&d)
}

/// Kolmogorov distribution survival Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}.
fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample KS test against U(0, 1) with the asymptotic p-value.
pub fn ks_uniform(values: &[f64]) -> Result<KsResult> {
    let n = values.len();
    if n == 0 {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let nf = n as f64;
    let statistic = v.iter().enumerate().fold(0.0_f64, |d, (k, &x)| {
        let x = x.clamp(0.0, 1.0);
        d.max((k as f64 + 1.0) / nf - x).max(x - k as f64 / nf)
    });
    let sqrt_n = nf.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * statistic;
    Ok(KsResult { statistic, p_value: kolmogorov_survival(lambda) })
}

fn ln_binomial_pmf(k: u64, n: u64, p: f64) -> f64 {
    let (k, n) = (k as f64, n as f64);
    let ln_choose = ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0);
    let a = if k == 0.0 { 0.0 } else { k * p.ln() };
    let b = if k == n { 0.0 } else { (n - k) * (1.0 - p).ln() };
    ln_choose + a + b
}

/// P(X ≥ k) for X ~ Binomial(n, p).
pub fn binomial_upper_tail(k: u64, n: u64, p: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    (k..=n).map(|i| ln_binomial_pmf(i, n, p).exp()).sum::<f64>().min(1.0)
}

/// Exact two-sided binomial test: total probability of outcomes no more
/// likely than the observed count.
pub fn binomial_two_sided(k: u64, n: u64, p: f64) -> f64 {
    let observed = ln_binomial_pmf(k, n, p);
    let cutoff = observed + 1e-7_f64.ln_1p();
    (0..=n)
        .map(|i| ln_binomial_pmf(i, n, p))
        .filter(|&l| l <= cutoff)
        .map(f64::exp)
        .sum::<f64>()
        .min(1.0)
}

/// One-sided sign test: P(at least `wins` successes out of wins + losses) under p = ½.
pub fn sign_test(wins: u64, losses: u64) -> f64 {
    binomial_upper_tail(wins, wins + losses, 0.5)
}
