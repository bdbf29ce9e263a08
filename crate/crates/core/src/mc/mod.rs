//! Monte Carlo rejection-frequency experiments.
//!
//! Trial `j` of an experiment simulates its path and draws its test noise
//! from `derive_seed(master_seed, j)`, so the tally does not depend on the
//! order in which trials run or on the number of workers.

mod diagnostics;
mod tables;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::estimators::{
    brownian_presence_statistic, jump_activity_statistic, NoiseSpec, ThresholdSpec, DEFAULT_CRITICAL_VALUE,
};
use crate::rng::derive_seed;
use crate::sim::{simulate_model, Jumps, ModelSpec};
use crate::time::StepSize;

pub use diagnostics::{
    kolmogorov_p_value, kolmogorov_survival, ks_distance_standard_normal, ks_two_sample, normality_diagnostics,
    NormalityDiagnostics, MIN_DIAGNOSTIC_SAMPLE,
};
pub use tables::{reproduce_table, reproduce_table_with, CellReport, TableId, TableReport, TableRow, TABLE_ROWS};

pub const DEFAULT_TRIALS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    /// Test of `σ ≡ 0`.
    BrownianPresence,
    /// Test of finite-variation jumps.
    JumpActivity,
}

impl std::str::FromStr for StatisticKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "presence" | "brownian_presence" | "brownian-presence" => Ok(StatisticKind::BrownianPresence),
            "activity" | "jump_activity" | "jump-activity" => Ok(StatisticKind::JumpActivity),
            other => Err(invalid(format!("unknown statistic {other:?} (expected presence or activity)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McExperiment {
    pub model: ModelSpec,
    pub n: usize,
    pub h: StepSize,
    pub v: f64,
    pub beta: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub statistic_kind: StatisticKind,
    pub critical_value: f64,
    /// Keep every trial's statistic in the report.
    #[serde(default)]
    pub retain_statistics: bool,
}

impl McExperiment {
    /// Experiment with the default threshold exponent, noise scale, critical
    /// value and trial count.
    pub fn new(model: ModelSpec, n: usize, h: StepSize, statistic_kind: StatisticKind) -> Self {
        Self {
            model,
            n,
            h,
            v: crate::estimators::DEFAULT_NOISE_SCALE,
            beta: crate::estimators::DEFAULT_BETA,
            trials: DEFAULT_TRIALS,
            master_seed: 0,
            statistic_kind,
            critical_value: DEFAULT_CRITICAL_VALUE,
            retain_statistics: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.n < 2 {
            return Err(invalid(format!("n must be at least 2, got {}", self.n)));
        }
        let h = self.h.years();
        if !(h.is_finite() && h > 0.0) {
            return Err(invalid(format!("step h must be positive, got {h}")));
        }
        if !(self.v.is_finite() && self.v > 0.0) {
            return Err(invalid(format!("noise scale v must be positive, got {}", self.v)));
        }
        if !(self.critical_value.is_finite() && self.critical_value > 0.0) {
            return Err(invalid("critical value must be positive"));
        }
        ThresholdSpec::with_beta(self.beta)?;
        self.model.validate()
    }

    /// Assumptions that affect comparability with published numbers.
    pub fn notes(&self) -> Vec<String> {
        match self.model.jumps {
            Jumps::Stable { scale, .. } => vec![format!(
                "stable scale = {scale} (unit annualized scale assumed; absolute rejection rates depend on it)"
            )],
            _ => Vec::new(),
        }
    }
}

/// How trials are scheduled. Results are identical for every choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// `workers = None` uses the global rayon pool. Runs sequentially when the
    /// `parallel` feature is disabled.
    Parallel { workers: Option<usize> },
}

impl Default for Execution {
    fn default() -> Self {
        Execution::Parallel { workers: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub experiment: McExperiment,
    pub rejections: usize,
    /// Trials whose statistic was undefined; never counted as rejections.
    pub degenerates: usize,
    /// `rejections / trials`.
    pub pct: f64,
    /// `rejections / (trials - degenerates)`, absent when every trial was degenerate.
    pub pct_non_degenerate: Option<f64>,
    pub all_degenerate: bool,
    pub notes: Vec<String>,
    /// Per-trial statistics in trial order (`None` for degenerate trials).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistics: Option<Vec<Option<f64>>>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl McReport {
    /// Binomial standard error of `pct`.
    pub fn standard_error(&self) -> f64 {
        let t = self.experiment.trials as f64;
        (self.pct * (1.0 - self.pct) / t).sqrt()
    }

    /// Finite statistics, for the normality diagnostics.
    pub fn finite_statistics(&self) -> Vec<f64> {
        self.statistics
            .iter()
            .flatten()
            .flatten()
            .copied()
            .collect()
    }
}

/// Flat machine-readable summary of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McRecord {
    pub model: ModelSpec,
    pub statistic: StatisticKind,
    pub n: usize,
    pub h: f64,
    pub h_label: String,
    pub v: f64,
    pub beta: f64,
    pub critical_value: f64,
    pub trials: usize,
    pub rejections: usize,
    pub degenerates: usize,
    pub pct: f64,
    pub seed: u64,
}

impl McReport {
    pub fn record(&self) -> McRecord {
        let e = &self.experiment;
        McRecord {
            model: e.model,
            statistic: e.statistic_kind,
            n: e.n,
            h: e.h.years(),
            h_label: e.h.to_string(),
            v: e.v,
            beta: e.beta,
            critical_value: e.critical_value,
            trials: e.trials,
            rejections: self.rejections,
            degenerates: self.degenerates,
            pct: self.pct,
            seed: e.master_seed,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct TrialOutcome {
    statistic: Option<f64>,
    reject: bool,
}

fn run_trial(exp: &McExperiment, index: usize) -> Result<TrialOutcome> {
    let seed = derive_seed(exp.master_seed, index as u64);
    let h = exp.h.years();
    let path = simulate_model(&exp.model, exp.n, h, seed)?;
    let spec = ThresholdSpec::with_beta(exp.beta)?;
    let noise = NoiseSpec::new(exp.v, seed)?;
    let outcome = match exp.statistic_kind {
        StatisticKind::BrownianPresence => brownian_presence_statistic(&path, &spec, &noise, exp.critical_value)?,
        StatisticKind::JumpActivity => jump_activity_statistic(&path, &spec, &noise, exp.critical_value)?,
    };
    Ok(TrialOutcome { statistic: outcome.statistic, reject: outcome.reject })
}

fn run_trials(exp: &McExperiment, execution: Execution) -> Result<Vec<TrialOutcome>> {
    match execution {
        Execution::Sequential => (0..exp.trials).map(|j| run_trial(exp, j)).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel { workers } => {
            use rayon::prelude::*;
            let job = || (0..exp.trials).into_par_iter().map(|j| run_trial(exp, j)).collect();
            match workers {
                None => job(),
                Some(w) => rayon::ThreadPoolBuilder::new()
                    .num_threads(w.max(1))
                    .build()
                    .map_err(|e| invalid(format!("cannot build worker pool: {e}")))?
                    .install(job),
            }
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel { .. } => (0..exp.trials).map(|j| run_trial(exp, j)).collect(),
    }
}

pub fn run_experiment(exp: &McExperiment) -> Result<McReport> {
    run_experiment_with(exp, Execution::default())
}

pub fn run_experiment_with(exp: &McExperiment, execution: Execution) -> Result<McReport> {
    exp.validate()?;
    let start = Instant::now();
    let outcomes = run_trials(exp, execution)?;
    let wall_time = start.elapsed();

    let rejections = outcomes.iter().filter(|o| o.reject).count();
    let degenerates = outcomes.iter().filter(|o| o.statistic.is_none()).count();
    let valid = exp.trials - degenerates;
    Ok(McReport {
        experiment: exp.clone(),
        rejections,
        degenerates,
        pct: rejections as f64 / exp.trials as f64,
        pct_non_degenerate: (valid > 0).then(|| rejections as f64 / valid as f64),
        all_degenerate: valid == 0,
        notes: exp.notes(),
        statistics: exp
            .retain_statistics
            .then(|| outcomes.iter().map(|o| o.statistic).collect()),
        wall_time,
    })
}
