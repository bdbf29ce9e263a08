//! Nonparametric threshold tests for the pathwise structure of a discretely
//! observed semimartingale: presence of a Brownian component, and finite
//! variation of the jumps. Includes the Lévy simulators, the Monte Carlo
//! harness for rejection-frequency studies, and a batching pipeline for
//! price series.

pub mod error;
pub mod estimators;
pub mod mc;
pub mod pipeline;
pub mod rng;
pub mod sim;
pub mod time;

pub use error::{Error, Result};
pub use estimators::{
    add_collocated_noise, brownian_presence_statistic, decide, decompose_increments, jump_activity_statistic,
    jump_sum_estimator, realized_variance, threshold_value, truncated_quarticity, truncated_variance, Decision,
    NoiseSpec, SamplePath, TestOutcome, ThresholdSpec,
};
pub use sim::{simulate_model, Diffusion, Drift, ExpOuParams, Jumps, ModelSpec};
pub use time::StepSize;
