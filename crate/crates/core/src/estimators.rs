//! Threshold estimators of integrated variance and quarticity, and the two
//! noise-augmented test statistics built on them.
//!
//! Every indicator uses the inclusive convention: an increment is kept when
//! its square is `<= r`.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::{stream, stream_rng};

pub const DEFAULT_BETA: f64 = 0.999;
pub const DEFAULT_C: f64 = 1.0;
pub const DEFAULT_NOISE_SCALE: f64 = 1e-4;
pub const DEFAULT_CRITICAL_VALUE: f64 = 1.96;

/// Uniformly spaced increments of a scalar process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    x0: f64,
    increments: Vec<f64>,
    h: f64,
}

impl SamplePath {
    pub fn new(x0: f64, increments: Vec<f64>, h: f64) -> Result<Self> {
        check_step(h)?;
        if increments.is_empty() {
            return Err(invalid("a sample path needs at least one increment"));
        }
        check_finite(&increments)?;
        if !x0.is_finite() {
            return Err(invalid("initial level must be finite"));
        }
        Ok(Self { x0, increments, h })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn into_increments(self) -> Vec<f64> {
        self.increments
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n(&self) -> usize {
        self.increments.len()
    }

    /// Horizon `T = n h`.
    pub fn horizon(&self) -> f64 {
        self.n() as f64 * self.h
    }

    /// Observed levels `x0, X_{t_1}, ..., X_{t_n}`.
    pub fn levels(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n() + 1);
        let mut x = self.x0;
        out.push(x);
        for d in &self.increments {
            x += d;
            out.push(x);
        }
        out
    }
}

/// Threshold `r_h = c h^beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSpec {
    c: f64,
    beta: f64,
}

impl ThresholdSpec {
    pub fn new(c: f64, beta: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(invalid(format!("threshold scale c must be positive, got {c}")));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(invalid(format!("threshold exponent beta must lie in (0,1), got {beta}")));
        }
        Ok(Self { c, beta })
    }

    pub fn with_beta(beta: f64) -> Result<Self> {
        Self::new(DEFAULT_C, beta)
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl Default for ThresholdSpec {
    fn default() -> Self {
        Self { c: DEFAULT_C, beta: DEFAULT_BETA }
    }
}

/// Scale `v` and stream seed of the artificial Gaussian noise `v sqrt(h) Z_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub v: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(v: f64, seed: u64) -> Result<Self> {
        if !(v.is_finite() && v >= 0.0) {
            return Err(invalid(format!("noise scale v must be nonnegative, got {v}")));
        }
        Ok(Self { v, seed })
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self { v: DEFAULT_NOISE_SCALE, seed: 0 }
    }
}

/// One evaluated test statistic with its ingredients.
///
/// `statistic` is `None` when the truncated quarticity vanished (every
/// augmented increment exceeded the threshold); such outcomes never reject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: Option<f64>,
    pub iv_hat: f64,
    pub iq_hat: f64,
    pub r_h: f64,
    pub n: usize,
    pub h: f64,
    pub v: f64,
    pub critical_value: f64,
    pub reject: bool,
}

impl TestOutcome {
    pub fn is_degenerate(&self) -> bool {
        self.statistic.is_none()
    }
}

/// Result of comparing a statistic with a two-sided critical value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub reject: bool,
    pub degenerate: bool,
}

/// `|statistic| > critical_value`, strict. A NaN statistic is degenerate and
/// never rejects.
pub fn decide(statistic: f64, critical_value: f64) -> Decision {
    if statistic.is_nan() {
        return Decision { reject: false, degenerate: true };
    }
    Decision { reject: statistic.abs() > critical_value, degenerate: false }
}

pub fn threshold_value(h: f64, spec: &ThresholdSpec) -> Result<f64> {
    check_step(h)?;
    Ok(spec.c * h.powf(spec.beta))
}

pub fn realized_variance(increments: &[f64]) -> f64 {
    increments.iter().map(|d| d * d).sum()
}

/// Sum of squared increments whose square does not exceed `r`.
pub fn truncated_variance(increments: &[f64], r: f64) -> Result<f64> {
    check_threshold(r)?;
    check_finite(increments)?;
    Ok(truncated_moments(increments, r).0)
}

/// Sum of fourth powers of kept increments, divided by `3h`.
pub fn truncated_quarticity(increments: &[f64], r: f64, h: f64) -> Result<f64> {
    check_threshold(r)?;
    check_step(h)?;
    check_finite(increments)?;
    Ok(truncated_moments(increments, r).1 / (3.0 * h))
}

/// Sum of the increments whose square exceeds `r`: the jump part of `X_T - x0`.
pub fn jump_sum_estimator(increments: &[f64], r: f64) -> Result<f64> {
    check_threshold(r)?;
    check_finite(increments)?;
    Ok(increments.iter().filter(|d| *d * *d > r).sum())
}

/// Splits each increment into its kept part `d 1{d^2 <= r}` and its flagged
/// jump part `d 1{d^2 > r}`. The two vectors add up to the input.
pub fn decompose_increments(increments: &[f64], r: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_threshold(r)?;
    check_finite(increments)?;
    Ok(increments
        .iter()
        .map(|&d| if d * d <= r { (d, 0.0) } else { (0.0, d) })
        .unzip())
}

/// `n` standard normal draws from `stream` under `seed`.
pub fn standard_normal_draws(seed: u64, stream: u64, n: usize) -> Vec<f64> {
    let mut rng = stream_rng(seed, stream);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// `Δ_i X + v sqrt(h) Z_i`, with `Z` drawn from the presence-noise stream of
/// `noise.seed`.
pub fn add_collocated_noise(increments: &[f64], noise: &NoiseSpec, h: f64) -> Result<Vec<f64>> {
    add_noise_on_stream(increments, noise, h, stream::PRESENCE_NOISE)
}

fn add_noise_on_stream(increments: &[f64], noise: &NoiseSpec, h: f64, stream: u64) -> Result<Vec<f64>> {
    check_step(h)?;
    check_finite(increments)?;
    let noise = NoiseSpec::new(noise.v, noise.seed)?;
    if noise.v == 0.0 {
        return Ok(increments.to_vec());
    }
    let scale = noise.v * h.sqrt();
    let mut rng = stream_rng(noise.seed, stream);
    Ok(increments
        .iter()
        .map(|d| {
            let z: f64 = StandardNormal.sample(&mut rng);
            d + scale * z
        })
        .collect())
}

/// Test of `sigma == 0` (no Brownian component).
///
/// `U_h = (IV^v - v^2 T) / sqrt(2 h IQ^v)` computed on the noise-augmented
/// increments; asymptotically standard normal under the null when the jumps
/// have finite variation, divergent otherwise.
pub fn brownian_presence_statistic(
    path: &SamplePath,
    spec: &ThresholdSpec,
    noise: &NoiseSpec,
    critical_value: f64,
) -> Result<TestOutcome> {
    require_noise(noise)?;
    check_critical(critical_value)?;
    let h = path.h();
    let r = threshold_value(h, spec)?;
    let augmented = add_noise_on_stream(path.increments(), noise, h, stream::PRESENCE_NOISE)?;
    Ok(augmented_statistic(&augmented, r, h, noise.v, critical_value))
}

/// Test of finite-variation jumps (Blumenthal–Getoor index below one).
///
/// Keeps only the increments flagged as jumps, adds independent noise, and
/// applies the presence statistic to the result. Rejection means the
/// hypothesis `alpha < 1` is rejected.
pub fn jump_activity_statistic(
    path: &SamplePath,
    spec: &ThresholdSpec,
    noise: &NoiseSpec,
    critical_value: f64,
) -> Result<TestOutcome> {
    require_noise(noise)?;
    check_critical(critical_value)?;
    let h = path.h();
    let r = threshold_value(h, spec)?;
    let jumps: Vec<f64> = path
        .increments()
        .iter()
        .map(|&d| if d * d > r { d } else { 0.0 })
        .collect();
    let augmented = add_noise_on_stream(&jumps, noise, h, stream::ACTIVITY_NOISE)?;
    Ok(augmented_statistic(&augmented, r, h, noise.v, critical_value))
}

fn augmented_statistic(augmented: &[f64], r: f64, h: f64, v: f64, critical_value: f64) -> TestOutcome {
    let n = augmented.len();
    let (sum2, sum4) = truncated_moments(augmented, r);
    let iq_hat = sum4 / (3.0 * h);
    let horizon = n as f64 * h;
    let statistic = if iq_hat > 0.0 {
        Some((sum2 - v * v * horizon) / (2.0 * h * iq_hat).sqrt())
    } else {
        None
    };
    let reject = statistic.is_some_and(|u| decide(u, critical_value).reject);
    TestOutcome {
        statistic,
        iv_hat: sum2,
        iq_hat,
        r_h: r,
        n,
        h,
        v,
        critical_value,
        reject,
    }
}

/// (Σ d² 1{d² ≤ r}, Σ d⁴ 1{d² ≤ r}) in one pass.
fn truncated_moments(increments: &[f64], r: f64) -> (f64, f64) {
    increments.iter().fold((0.0, 0.0), |(s2, s4), d| {
        let sq = d * d;
        if sq <= r {
            (s2 + sq, s4 + sq * sq)
        } else {
            (s2, s4)
        }
    })
}

fn check_step(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("step h must be finite and positive, got {h}")))
    }
}

fn check_threshold(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("threshold must be finite and positive, got {r}")))
    }
}

fn check_critical(cv: f64) -> Result<()> {
    if cv.is_finite() && cv > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("critical value must be positive, got {cv}")))
    }
}

fn require_noise(noise: &NoiseSpec) -> Result<()> {
    NoiseSpec::new(noise.v, noise.seed)?;
    if noise.v == 0.0 {
        return Err(invalid("the test statistics require a positive noise scale v"));
    }
    Ok(())
}

fn check_finite(increments: &[f64]) -> Result<()> {
    match increments.iter().position(|d| !d.is_finite()) {
        Some(i) => Err(invalid(format!("increment {i} is not finite ({})", increments[i]))),
        None => Ok(()),
    }
}
