use std::collections::HashMap;

use serde::Serialize;

use super::series::PriceSeries;
use crate::error::{invalid, Error, Result};
use crate::time::seconds_to_years;

/// Allowed relative deviation of an intra-session spacing from the modal one.
pub const DEFAULT_SPACING_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogReturns {
    pub increments: Vec<f64>,
    /// Modal intra-session spacing in years.
    pub h: f64,
    pub modal_spacing_ms: i64,
    pub sessions: usize,
    /// Returns dropped because they straddle a session boundary.
    pub dropped_boundary_returns: usize,
}

pub fn to_log_returns(series: &PriceSeries, exclude_session_gaps: bool) -> Result<LogReturns> {
    to_log_returns_with_tolerance(series, exclude_session_gaps, DEFAULT_SPACING_TOLERANCE)
}

/// Log-returns `ln p_i - ln p_{i-1}`, with `h` inferred from the most common
/// intra-session spacing. Returns across a session boundary are dropped when
/// `exclude_session_gaps` is set.
pub fn to_log_returns_with_tolerance(
    series: &PriceSeries,
    exclude_session_gaps: bool,
    tolerance: f64,
) -> Result<LogReturns> {
    if series.len() < 2 {
        return Err(invalid("need at least two observations"));
    }
    if !(tolerance.is_finite() && tolerance >= 0.0) {
        return Err(invalid("spacing tolerance must be nonnegative"));
    }
    let ts = series.timestamps_ms();
    let sessions = series.calendar.sessions(ts);
    let intra: Vec<bool> = sessions.windows(2).map(|w| w[0] == w[1]).collect();

    let mut counts: HashMap<i64, usize> = HashMap::new();
    for (i, w) in ts.windows(2).enumerate() {
        if intra[i] {
            *counts.entry(w[1] - w[0]).or_default() += 1;
        }
    }
    let modal = counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(spacing, _)| *spacing)
        .ok_or_else(|| invalid("no two consecutive observations share a session"))?;

    let offenders: Vec<usize> = ts
        .windows(2)
        .enumerate()
        .filter(|(i, w)| intra[*i] && ((w[1] - w[0] - modal).abs() as f64) > tolerance * modal as f64)
        .map(|(i, _)| i)
        .collect();
    if !offenders.is_empty() {
        return Err(Error::NonUniformSpacing {
            modal_ms: modal,
            count: offenders.len(),
            offenders: offenders.into_iter().take(10).collect(),
        });
    }

    let logs: Vec<f64> = series.prices().iter().map(|p| p.ln()).collect();
    let mut increments = Vec::with_capacity(logs.len() - 1);
    let mut dropped = 0;
    for (i, w) in logs.windows(2).enumerate() {
        if exclude_session_gaps && !intra[i] {
            dropped += 1;
        } else {
            increments.push(w[1] - w[0]);
        }
    }
    let session_count = 1 + intra.iter().filter(|same| !**same).count();
    Ok(LogReturns {
        increments,
        h: seconds_to_years(modal as f64 / 1000.0),
        modal_spacing_ms: modal,
        sessions: session_count,
        dropped_boundary_returns: dropped,
    })
}

/// Consecutive non-overlapping blocks; the remainder is dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Batches<'a> {
    pub blocks: Vec<&'a [f64]>,
    pub dropped: usize,
}

pub fn batch(increments: &[f64], batch_size: usize) -> Result<Batches<'_>> {
    if batch_size < 2 {
        return Err(invalid(format!("batch size must be at least 2, got {batch_size}")));
    }
    if increments.len() < batch_size {
        return Err(Error::InsufficientData { needed: batch_size, available: increments.len() });
    }
    let chunks = increments.chunks_exact(batch_size);
    let dropped = chunks.remainder().len();
    Ok(Batches { blocks: chunks.collect(), dropped })
}
