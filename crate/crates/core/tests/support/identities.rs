//! Exact algebraic identities of the estimators and the return pipeline,
//! checked on random inputs with proptest.

use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestError, TestRunner};
use threshtest::pipeline::{batch, to_log_returns, PriceSeries, SessionCalendar};
use threshtest::{decompose_increments, jump_sum_estimator, realized_variance, truncated_quarticity, truncated_variance};

pub const TOLERANCE: f64 = 1e-12;

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= TOLERANCE * scale.max(f64::MIN_POSITIVE)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

/// Increments on a mix of scales, so thresholds split them nontrivially.
fn increments() -> impl Strategy<Value = Vec<f64>> {
    vec(prop_oneof![3 => -1e-2..1e-2f64, 1 => -1.0..1.0f64, 1 => Just(0.0)], 1..10_000)
}

fn threshold() -> impl Strategy<Value = f64> {
    (-12.0..0.0f64).prop_map(|e| 10f64.powf(e))
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| match e {
        TestError::Fail(reason, value) => {
            let shown = format!("{value:?}");
            let shown = if shown.len() > 200 { format!("{}...", &shown[..200]) } else { shown };
            format!("{reason} for input {shown}")
        }
        TestError::Abort(reason) => reason.to_string(),
    })
}

/// `RV = TV(r) + sum of squared flagged increments`.
pub fn truncated_variance_decomposition(cases: u32) -> Result<(), String> {
    run(cases, (increments(), threshold()), |(xs, r)| {
        let tv = truncated_variance(&xs, r).unwrap();
        let flagged: f64 = xs.iter().filter(|d| *d * *d > r).map(|d| d * d).sum();
        let rv = realized_variance(&xs);
        ensure(close(rv, tv + flagged, rv), || format!("RV {rv} vs TV {tv} + J {flagged}"))
    })
}

/// Kept plus flagged parts reproduce every increment, and their sums split
/// `X_T - x0` into truncated and jump-sum pieces.
pub fn jump_sum_decomposition(cases: u32) -> Result<(), String> {
    run(cases, (increments(), threshold()), |(xs, r)| {
        let (kept, jumps) = decompose_increments(&xs, r).unwrap();
        for i in 0..xs.len() {
            ensure(kept[i] + jumps[i] == xs[i] && (kept[i] == 0.0 || jumps[i] == 0.0), || {
                format!("increment {i} split as {} + {}", kept[i], jumps[i])
            })?;
        }
        let total: f64 = xs.iter().sum();
        let kept_sum: f64 = kept.iter().sum();
        let js = jump_sum_estimator(&xs, r).unwrap();
        let scale: f64 = xs.iter().map(|d| d.abs()).sum();
        ensure(close(total, kept_sum + js, scale), || format!("{total} vs {kept_sum} + {js}"))
    })
}

/// `TV(λΔ, λ²r) = λ² TV(Δ, r)` and `TQ(λΔ, λ²r) = λ⁴ TQ(Δ, r)`.
pub fn scale_covariance(cases: u32) -> Result<(), String> {
    run(cases, (increments(), threshold(), -20i32..20, 1e-6..1.0f64), |(xs, r, k, h)| {
        let lambda = 2f64.powi(k);
        let scaled: Vec<f64> = xs.iter().map(|d| lambda * d).collect();
        let r2 = lambda * lambda * r;
        let tv = truncated_variance(&xs, r).unwrap();
        let tv_s = truncated_variance(&scaled, r2).unwrap();
        let tq = truncated_quarticity(&xs, r, h).unwrap();
        let tq_s = truncated_quarticity(&scaled, r2, h).unwrap();
        ensure(close(tv_s, lambda.powi(2) * tv, tv_s), || format!("TV {tv_s} vs {}", lambda.powi(2) * tv))?;
        ensure(close(tq_s, lambda.powi(4) * tq, tq_s), || format!("TQ {tq_s} vs {}", lambda.powi(4) * tq))
    })
}

/// Raising the threshold never lowers the truncated moments.
pub fn monotone_in_threshold(cases: u32) -> Result<(), String> {
    run(cases, (increments(), threshold(), threshold()), |(xs, a, b)| {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (tv_lo, tv_hi) = (truncated_variance(&xs, lo).unwrap(), truncated_variance(&xs, hi).unwrap());
        let (tq_lo, tq_hi) = (truncated_quarticity(&xs, lo, 1.0).unwrap(), truncated_quarticity(&xs, hi, 1.0).unwrap());
        ensure(tv_lo <= tv_hi && tq_lo <= tq_hi, || format!("TV {tv_lo} > {tv_hi} or TQ {tq_lo} > {tq_hi}"))?;
        let rv = realized_variance(&xs);
        ensure(tv_hi <= rv * (1.0 + TOLERANCE), || format!("TV {tv_hi} above RV {rv}"))
    })
}

/// Five-minute bars over several daily sessions.
fn sessions() -> impl Strategy<Value = (Vec<i64>, Vec<f64>, usize)> {
    (vec(2usize..=85, 1..8), 2usize..300).prop_flat_map(|(lens, batch_size)| {
        let mut ts = Vec::new();
        for (day, len) in lens.iter().enumerate() {
            let open = (day as i64 * 86_400 + 14 * 3600 + 1800) * 1000;
            ts.extend((0..*len as i64).map(|i| open + i * 300_000));
        }
        let n = ts.len();
        (Just(ts), vec(1.0..5000.0f64, n), Just(batch_size))
    })
}

/// Batch sums, the dropped tail and any excluded boundary returns add up to
/// `ln(p_last / p_first)`.
pub fn batch_sum_telescoping(cases: u32) -> Result<(), String> {
    run(cases, (sessions(), any::<bool>()), |((ts, prices, batch_size), exclude)| {
        let calendar = SessionCalendar::Daily { utc_offset_minutes: 0 };
        let series = PriceSeries::new(ts.clone(), prices.clone(), calendar).unwrap();
        let returns = to_log_returns(&series, exclude).unwrap();
        let boundary: f64 = calendar
            .sessions(&ts)
            .windows(2)
            .zip(prices.windows(2))
            .filter(|(s, _)| exclude && s[0] != s[1])
            .map(|(_, p)| p[1].ln() - p[0].ln())
            .sum();
        let total = prices[prices.len() - 1].ln() - prices[0].ln();
        let scale: f64 = prices.windows(2).map(|p| (p[1].ln() - p[0].ln()).abs()).sum::<f64>() + prices[0].ln().abs();
        let inc = &returns.increments;
        let (blocks, tail) = match batch(inc, batch_size) {
            Ok(b) => {
                let used = b.blocks.len() * batch_size;
                (b.blocks.iter().map(|blk| blk.iter().sum::<f64>()).sum::<f64>(), inc[used..].iter().sum::<f64>())
            }
            Err(_) => (0.0, inc.iter().sum::<f64>()),
        };
        ensure(close(total, blocks + tail + boundary, scale), || {
            format!("{total} vs {blocks} + {tail} + {boundary}")
        })
    })
}

pub fn all(cases: u32) -> Vec<(&'static str, Result<(), String>)> {
    vec![
        ("truncated-variance decomposition", truncated_variance_decomposition(cases)),
        ("jump-sum decomposition", jump_sum_decomposition(cases)),
        ("scale covariance", scale_covariance(cases)),
        ("monotonicity in r", monotone_in_threshold(cases)),
        ("batch-sum telescoping", batch_sum_telescoping(cases)),
    ]
}
