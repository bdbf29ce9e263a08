//! Moment and Kolmogorov–Smirnov diagnostics for simulated statistics.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Result};

pub const MIN_DIAGNOSTIC_SAMPLE: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityDiagnostics {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    /// NaN for a constant sample.
    pub skewness: f64,
    /// NaN for a constant sample.
    pub excess_kurtosis: f64,
    /// Kolmogorov–Smirnov distance to N(0, 1).
    pub ks_distance: f64,
    pub ks_p_value: f64,
}

/// Sample moments and the one-sample KS test against the standard normal.
pub fn normality_diagnostics(values: &[f64]) -> Result<NormalityDiagnostics> {
    if values.len() < MIN_DIAGNOSTIC_SAMPLE {
        return Err(invalid(format!(
            "need at least {MIN_DIAGNOSTIC_SAMPLE} values, got {}",
            values.len()
        )));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(invalid(format!("value {i} is not finite")));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (m2, m3, m4) = values.iter().fold((0.0, 0.0, 0.0), |(a, b, c), x| {
        let d = x - mean;
        let d2 = d * d;
        (a + d2, b + d2 * d, c + d2 * d2)
    });
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (f64::NAN, f64::NAN)
    };
    let ks_distance = ks_distance_standard_normal(values);
    Ok(NormalityDiagnostics {
        n: values.len(),
        mean,
        variance: m2 * n / (n - 1.0),
        skewness,
        excess_kurtosis,
        ks_distance,
        ks_p_value: kolmogorov_p_value(ks_distance, n),
    })
}

/// `sup_x |F_n(x) - Φ(x)|`.
pub fn ks_distance_standard_normal(values: &[f64]) -> f64 {
    let normal = Normal::standard();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Two-sample KS distance and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    (d, kolmogorov_p_value(d, na * nb / (na + nb)))
}

/// Asymptotic KS p-value with Stephens' small-sample correction.
pub fn kolmogorov_p_value(distance: f64, effective_n: f64) -> f64 {
    let sqrt_n = effective_n.sqrt();
    kolmogorov_survival((sqrt_n + 0.12 + 0.11 / sqrt_n) * distance)
}

/// `Q(λ) = 2 Σ_{k≥1} (-1)^{k-1} exp(-2 k² λ²)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let a = -2.0 * lambda * lambda;
    let mut sum = 0.0;
    let mut sign = 2.0;
    let mut previous = 0.0f64;
    for k in 1..=100 {
        let kf = k as f64;
        let term = sign * (a * kf * kf).exp();
        sum += term;
        if term.abs() <= 1e-10 * previous || term.abs() <= 1e-16 * sum {
            return sum.clamp(0.0, 1.0);
        }
        sign = -sign;
        previous = term.abs();
    }
    1.0
}
