use std::process::ExitCode;

use anyhow::Result;
use threshtest::mc::{normality_diagnostics, run_experiment_with, Execution, McExperiment, StatisticKind};
use threshtest::sim::sample_gamma;
use threshtest::{ModelSpec, StepSize};

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

pub fn run(seed: u64) -> Result<ExitCode> {
    let mut checks = Vec::new();

    let preset = |name| ModelSpec::preset(name).expect("built-in preset");
    let null = McExperiment {
        trials: 400,
        master_seed: seed,
        retain_statistics: true,
        ..McExperiment::new(preset("table2-null"), 1000, StepSize::FiveMinutes, StatisticKind::BrownianPresence)
    };
    let report = run_experiment_with(&null, Execution::default())?;
    checks.push(Check {
        name: "null size",
        pass: (0.01..=0.10).contains(&report.pct),
        detail: format!("pct {:.4} over {} trials", report.pct, report.experiment.trials),
    });
    let d = normality_diagnostics(&report.finite_statistics())?;
    checks.push(Check {
        name: "null normality",
        pass: d.ks_p_value > 1e-3,
        detail: format!("KS {:.4}, p = {:.4}", d.ks_distance, d.ks_p_value),
    });

    let alt = McExperiment { model: preset("table2-alt"), retain_statistics: false, ..null };
    let report = run_experiment_with(&alt, Execution::default())?;
    checks.push(Check {
        name: "power with sigma = 0.2",
        pass: report.pct >= 0.99,
        detail: format!("pct {:.4}", report.pct),
    });

    let mut rng = threshtest::rng::stream_rng(seed, 0);
    let shape = 0.3;
    let draws: Vec<f64> = (0..200_000).map(|_| sample_gamma(shape, 1.0, &mut rng)).collect::<Result<_, _>>()?;
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    checks.push(Check {
        name: "gamma sampler mean",
        pass: (mean - shape).abs() < 5.0 * (shape / draws.len() as f64).sqrt(),
        detail: format!("mean {mean:.5} for shape {shape}"),
    });

    let mut ok = true;
    for c in &checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        ok &= c.pass;
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
