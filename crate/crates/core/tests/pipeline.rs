use chrono::{DateTime, Duration};
use threshtest::pipeline::{
    analyze_series, batch, load_price_series, to_log_returns, AnalysisConfig, InputFormat, SessionCalendar,
};
use threshtest::time::FIVE_MINUTES;
use threshtest::{simulate_model, Diffusion, Drift, Jumps, ModelSpec};

/// Renders a simulated log-price path as a CSV of ISO timestamps and prices.
fn csv_from_model(model: &ModelSpec, n: usize, seed: u64) -> String {
    let path = simulate_model(model, n, FIVE_MINUTES, seed).unwrap();
    let start = DateTime::parse_from_rfc3339("2024-01-02T00:00:00Z").unwrap();
    let mut out = String::from("time,price\n");
    for (i, level) in path.levels().iter().enumerate() {
        let t = start + Duration::minutes(5 * i as i64);
        out.push_str(&format!("{},{}\n", t.format("%Y-%m-%dT%H:%M:%S"), 100.0 * level.exp()));
    }
    out
}

#[test]
fn brownian_csv_end_to_end() {
    let text = csv_from_model(&ModelSpec { diffusion: Diffusion::Constant { sigma: 0.2 }, jumps: Jumps::None, drift: Drift::Zero }, 10_000, 5);
    let series = load_price_series(text.as_bytes(), &InputFormat::default()).unwrap();
    assert_eq!(series.len(), 10_001);
    let returns = to_log_returns(&series, false).unwrap();
    assert_eq!(returns.increments.len(), 10_000);
    assert!((returns.h - FIVE_MINUTES).abs() < 1e-18);

    let config = AnalysisConfig { seed: 7, ..AnalysisConfig::default() };
    let report = analyze_series(&returns.increments, returns.h, &config).unwrap();
    assert_eq!(report.batches, 10);
    assert!(report.activity_outside_fraction <= report.retention_bound);
    assert!(report.finite_variation_retained);
    assert!(report.presence_all_reject);
    for b in &report.per_batch {
        let u = b.presence_outcome.as_ref().unwrap().statistic.unwrap();
        assert!(u > 10.0, "batch {} has U = {u}", b.batch_index);
    }
    assert_eq!(report, analyze_series(&returns.increments, returns.h, &config).unwrap());
}

#[test]
fn overnight_exclusion_drops_one_return_per_boundary() {
    let mut text = String::from("t,p\n");
    let mut price = 100.0;
    for day in 0..3i64 {
        for bar in 0..79i64 {
            let t = 1_700_000_000 - 1_700_000_000 % 86_400 + day * 86_400 + 14 * 3600 + 1800 + bar * 300;
            price *= 1.0 + 1e-4 * ((day * 79 + bar) % 7 - 3) as f64;
            text.push_str(&format!("{t},{price}\n"));
        }
    }
    let format = InputFormat { calendar: SessionCalendar::Daily { utc_offset_minutes: 0 }, ..InputFormat::default() };
    let series = load_price_series(text.as_bytes(), &format).unwrap();
    let kept = to_log_returns(&series, true).unwrap();
    let all = to_log_returns(&series, false).unwrap();
    assert_eq!(kept.sessions, 3);
    assert_eq!(kept.increments.len(), series.len() - kept.sessions);
    assert_eq!(all.increments.len(), series.len() - 1);
    assert_eq!(kept.dropped_boundary_returns, 2);
}

#[test]
fn published_sample_sizes_batch_as_described() {
    let fx = vec![0.0; 64_284];
    let b = batch(&fx, 1000).unwrap();
    assert_eq!((b.blocks.len(), b.dropped), (64, 284));
    let spx = vec![0.0; 78_497];
    assert_eq!(batch(&spx, 1000).unwrap().blocks.len(), 78);
}
