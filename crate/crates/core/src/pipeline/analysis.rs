//! Two-stage batch analysis: first the finite-variation test on every batch,
//! then, if finite variation is retained, the Brownian-presence test.

use serde::{Deserialize, Serialize};

use super::returns::batch;
use crate::error::{invalid, Result};
use crate::estimators::{
    brownian_presence_statistic, jump_activity_statistic, NoiseSpec, SamplePath, TestOutcome, ThresholdSpec,
    DEFAULT_BETA, DEFAULT_CRITICAL_VALUE, DEFAULT_NOISE_SCALE,
};
use crate::rng::derive_seed;

/// Nominal level of the two-sided 1.96 band.
const NOMINAL_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub beta: f64,
    pub v: f64,
    pub seed: u64,
    pub critical_value: f64,
    pub batch_size: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            beta: DEFAULT_BETA,
            v: DEFAULT_NOISE_SCALE,
            seed: 0,
            critical_value: DEFAULT_CRITICAL_VALUE,
            batch_size: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchRecord {
    pub batch_index: usize,
    pub activity_outcome: TestOutcome,
    pub presence_outcome: Option<TestOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchReport {
    pub config: AnalysisConfig,
    pub batch_size: usize,
    pub h: f64,
    pub batches: usize,
    pub dropped_increments: usize,
    pub per_batch: Vec<BatchRecord>,
    /// Share of batches whose activity statistic fell outside the band.
    pub activity_outside_fraction: f64,
    /// Largest outside fraction still consistent with the nominal level.
    pub retention_bound: f64,
    pub finite_variation_retained: bool,
    /// Every batch rejected `σ ≡ 0`; false when stage two did not run.
    pub presence_all_reject: bool,
}

/// `0.05 + 2 sqrt(0.05 · 0.95 / B)`.
pub fn retention_bound(batches: usize) -> f64 {
    NOMINAL_LEVEL + 2.0 * (NOMINAL_LEVEL * (1.0 - NOMINAL_LEVEL) / batches as f64).sqrt()
}

/// Batch `j` draws its noise from `derive_seed(config.seed, j)`.
pub fn analyze_series(increments: &[f64], h: f64, config: &AnalysisConfig) -> Result<BatchReport> {
    let spec = ThresholdSpec::with_beta(config.beta)?;
    if !(config.v.is_finite() && config.v > 0.0) {
        return Err(invalid(format!("noise scale v must be positive, got {}", config.v)));
    }
    let batches = batch(increments, config.batch_size)?;
    let count = batches.blocks.len();

    let paths = batches
        .blocks
        .iter()
        .map(|block| SamplePath::new(0.0, block.to_vec(), h))
        .collect::<Result<Vec<_>>>()?;
    let noises = (0..count)
        .map(|j| NoiseSpec::new(config.v, derive_seed(config.seed, j as u64)))
        .collect::<Result<Vec<_>>>()?;

    let activity = paths
        .iter()
        .zip(&noises)
        .map(|(p, noise)| jump_activity_statistic(p, &spec, noise, config.critical_value))
        .collect::<Result<Vec<_>>>()?;
    let outside = activity.iter().filter(|o| o.reject).count();
    let fraction = outside as f64 / count as f64;
    let bound = retention_bound(count);
    let retained = fraction <= bound;

    let presence: Vec<Option<TestOutcome>> = if retained {
        paths
            .iter()
            .zip(&noises)
            .map(|(p, noise)| brownian_presence_statistic(p, &spec, noise, config.critical_value).map(Some))
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![None; count]
    };
    let presence_all_reject = retained && presence.iter().all(|o| o.as_ref().is_some_and(|o| o.reject));

    let per_batch = activity
        .into_iter()
        .zip(presence)
        .enumerate()
        .map(|(batch_index, (activity_outcome, presence_outcome))| BatchRecord {
            batch_index,
            activity_outcome,
            presence_outcome,
        })
        .collect();

    Ok(BatchReport {
        config: *config,
        batch_size: config.batch_size,
        h,
        batches: count,
        dropped_increments: batches.dropped,
        per_batch,
        activity_outside_fraction: fraction,
        retention_bound: bound,
        finite_variation_retained: retained,
        presence_all_reject,
    })
}
