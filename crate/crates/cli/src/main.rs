mod config;
mod selftest;

use std::fmt;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use threshtest::mc::{
    normality_diagnostics, reproduce_table_with, run_experiment_with, Execution, McExperiment, StatisticKind,
    TableId, MIN_DIAGNOSTIC_SAMPLE,
};
use threshtest::pipeline::{
    analyze_series, load_price_series, to_log_returns_with_tolerance, AnalysisConfig, ColumnRef, HeaderMode,
    InputFormat, SessionCalendar, DEFAULT_SPACING_TOLERANCE,
};
use threshtest::{
    decompose_increments, simulate_model, threshold_value, Diffusion, Drift, Jumps, ModelSpec, StepSize,
    ThresholdSpec,
};

use config::FileConfig;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "threshtest", version, about = "Threshold tests for Brownian presence and jump activity")]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one sample path of a model.
    Simulate(SimulateArgs),
    /// Reproduce one of the published rejection-frequency tables.
    McTable(McTableArgs),
    /// Run a single Monte Carlo experiment.
    McRun(McRunArgs),
    /// Run the two-stage test on a price file.
    Analyze(AnalyzeArgs),
    /// Quick statistical self-check of the samplers and the null calibration.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug, Default)]
struct ModelArgs {
    /// Model preset (table1-a06, table1-a16, table2-null, ..., table5-alt).
    #[arg(long)]
    model: Option<String>,
    /// Constant volatility of the Brownian part.
    #[arg(long)]
    sigma: Option<f64>,
    /// Stable index in (0, 2]; switches the jumps to a symmetric stable process.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    stable_scale: Option<f64>,
    /// Compound Poisson intensity; switches the jumps to compound Poisson.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    jump_mean: Option<f64>,
    #[arg(long)]
    jump_sd: Option<f64>,
    /// Drift `(mu - sigma²/2)` per unit time.
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    n: Option<usize>,
    /// 1min, 5min, 1hour, 1day, or a year fraction.
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct McTableArgs {
    /// Table number, 1 to 5.
    table: String,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Debug)]
struct McRunArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// presence or activity.
    #[arg(long)]
    statistic: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    v: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    critical_value: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Keep every trial's statistic and report normality diagnostics.
    #[arg(long)]
    keep_statistics: bool,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Delimited file with (timestamp, price) rows.
    input: PathBuf,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    v: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    critical_value: Option<f64>,
    /// Drop returns that straddle a session boundary.
    #[arg(long)]
    exclude_overnight: bool,
    #[arg(long)]
    delimiter: Option<String>,
    /// Timestamp column, by header name or zero-based index.
    #[arg(long)]
    timestamp_column: Option<String>,
    /// Price column, by header name or zero-based index.
    #[arg(long)]
    price_column: Option<String>,
    /// Sessions are calendar days in UTC plus this offset.
    #[arg(long, allow_hyphen_values = true)]
    utc_offset_minutes: Option<i32>,
    /// Sessions break at any gap of at least this many seconds.
    #[arg(long)]
    session_gap: Option<i64>,
    #[arg(long)]
    spacing_tolerance: Option<f64>,
    /// Write the kept / flagged-jump split of every increment as CSV.
    #[arg(long)]
    dump_decomposition: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    #[arg(long)]
    seed: Option<u64>,
}

/// Invalid user input; exits with status 2.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn usage_from(e: threshtest::Error) -> anyhow::Error {
    usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

struct Context_ {
    file: FileConfig,
    format: Format,
    output: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<ExitCode> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p).map_err(|e| {
            if e.chain().any(|c| c.is::<io::Error>()) {
                e
            } else {
                usage(format!("{e:#}"))
            }
        })?,
        None => FileConfig::default(),
    };
    let format = match (cli.format, file.format.as_deref()) {
        (Some(f), _) => f,
        (None, Some(s)) => Format::from_str(s, true).map_err(|_| usage(format!("unknown format {s:?}")))?,
        (None, None) => Format::Text,
    };
    let output = cli.output.clone().or_else(|| file.output.clone().map(PathBuf::from));
    let ctx = Context_ { file, format, output };
    match cli.command {
        Command::Simulate(a) => simulate(&ctx, a),
        Command::McTable(a) => mc_table(&ctx, a),
        Command::McRun(a) => mc_run(&ctx, a),
        Command::Analyze(a) => analyze(&ctx, a),
        Command::Selftest(a) => selftest::run(a.seed.or(ctx.file.seed).unwrap_or(1)),
    }
}

/// Run metadata: version, command, resolved configuration and seed.
#[derive(Serialize)]
struct Banner<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    config: &'a C,
}

impl<C: Serialize> Banner<'_, C> {
    fn text(&self) -> String {
        let cfg = serde_json::to_string(self.config).unwrap_or_default();
        format!(
            "# {} {} {}\n# seed: {}\n# config: {}\n\n",
            self.tool, self.version, self.command, self.seed, cfg
        )
    }
}

fn emit(ctx: &Context_, text: &str) -> Result<()> {
    match &ctx.output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn emit_json(ctx: &Context_, value: &serde_json::Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    emit(ctx, &s)
}

fn parse_step(s: &str) -> Result<StepSize> {
    s.parse::<StepSize>().map_err(usage_from)
}

fn resolve_model(args: &ModelArgs, file: &FileConfig, default_preset: &str) -> Result<ModelSpec> {
    let mut spec = match (&args.model, &file.model, &file.preset) {
        (Some(name), _, _) => preset(name)?,
        (None, Some(m), _) => *m,
        (None, None, Some(name)) => preset(name)?,
        (None, None, None) => preset(default_preset)?,
    };
    if let Some(sigma) = args.sigma {
        spec.diffusion = Diffusion::Constant { sigma };
    }
    if args.alpha.is_some() || args.stable_scale.is_some() {
        let (alpha0, scale0) = match spec.jumps {
            Jumps::Stable { alpha, scale } => (alpha, scale),
            _ => (1.0, threshtest::sim::DEFAULT_STABLE_SCALE),
        };
        spec.jumps = Jumps::Stable {
            alpha: args.alpha.unwrap_or(alpha0),
            scale: args.stable_scale.unwrap_or(scale0),
        };
    }
    if args.lambda.is_some() || args.jump_mean.is_some() || args.jump_sd.is_some() {
        let (l0, m0, s0) = match spec.jumps {
            Jumps::CompoundPoisson { lambda, jump_mean, jump_sd } => (lambda, jump_mean, jump_sd),
            _ => (5.0, 0.0, 0.6),
        };
        spec.jumps = Jumps::CompoundPoisson {
            lambda: args.lambda.unwrap_or(l0),
            jump_mean: args.jump_mean.unwrap_or(m0),
            jump_sd: args.jump_sd.unwrap_or(s0),
        };
    }
    if let Some(mu) = args.mu {
        spec.drift = Drift::MuMinusHalfSigma2 { mu };
    }
    spec.validate().map_err(usage_from)?;
    Ok(spec)
}

fn preset(name: &str) -> Result<ModelSpec> {
    ModelSpec::preset(name).ok_or_else(|| {
        usage(format!(
            "unknown model {name:?}; presets: {}",
            ModelSpec::PRESET_NAMES.join(", ")
        ))
    })
}

#[derive(Serialize)]
struct SimulateConfig {
    model: ModelSpec,
    n: usize,
    h: StepSize,
    h_years: f64,
}

fn simulate(ctx: &Context_, a: SimulateArgs) -> Result<ExitCode> {
    let f = &ctx.file;
    let model = resolve_model(&a.model, f, "table2-null")?;
    let n = a.n.or(f.n).unwrap_or(1000);
    let h = parse_step(a.h.as_deref().or(f.h.as_deref()).unwrap_or("5min"))?;
    let seed = a.seed.or(f.seed).unwrap_or(0);
    let path = simulate_model(&model, n, h.years(), seed).map_err(usage_from)?;
    let cfg = SimulateConfig { model, n, h, h_years: h.years() };
    let banner = Banner { tool: "threshtest", version: VERSION, command: "simulate", seed, config: &cfg };
    match ctx.format {
        Format::Json => emit_json(
            ctx,
            &json!({
                "banner": banner,
                "path": {
                    "x0": path.x0(),
                    "h": path.h(),
                    "n": path.n(),
                    "horizon": path.horizon(),
                    "increments": path.increments(),
                }
            }),
        ),
        Format::Text => {
            let mut s = banner.text();
            s.push_str("increment\n");
            for x in path.increments() {
                s.push_str(&format!("{x:e}\n"));
            }
            emit(ctx, &s)
        }
    }?;
    Ok(ExitCode::SUCCESS)
}

fn execution(workers: Option<usize>) -> Result<Execution> {
    match workers {
        Some(0) => Err(usage("--workers must be at least 1")),
        Some(1) => Ok(Execution::Sequential),
        w => Ok(Execution::Parallel { workers: w }),
    }
}

#[derive(Serialize)]
struct TableConfig {
    table: u8,
    trials: usize,
}

fn mc_table(ctx: &Context_, a: McTableArgs) -> Result<ExitCode> {
    let f = &ctx.file;
    let table: TableId = a.table.parse().map_err(usage_from)?;
    let trials = a.trials.or(f.trials).unwrap_or(threshtest::mc::DEFAULT_TRIALS);
    if trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let seed = a.seed.or(f.seed).unwrap_or(0);
    let exec = execution(a.workers.or(f.workers))?;
    let report = reproduce_table_with(table, trials, seed, exec).map_err(usage_from)?;
    let wall: f64 = report.reports().map(|r| r.wall_time.as_secs_f64()).sum();
    eprintln!("mc-table {table}: {} cells in {wall:.2}s of trial time", report.cells.len());

    let cfg = TableConfig { table: table.number(), trials };
    let banner = Banner { tool: "threshtest", version: VERSION, command: "mc-table", seed, config: &cfg };
    match ctx.format {
        Format::Json => {
            let records: Vec<_> = report
                .cells
                .iter()
                .map(|c| {
                    json!({
                        "row": c.row,
                        "column": c.column,
                        "column_label": c.column_label,
                        "published_pct": c.published_pct,
                        "record": c.report.record(),
                        "notes": c.report.notes,
                    })
                })
                .collect();
            emit_json(
                ctx,
                &json!({ "banner": banner, "table": table.number(), "title": report.title, "cells": records }),
            )?;
        }
        Format::Text => emit(ctx, &format!("{}{}", banner.text(), report.render_text()))?,
    }
    Ok(ExitCode::SUCCESS)
}

fn mc_run(ctx: &Context_, a: McRunArgs) -> Result<ExitCode> {
    let f = &ctx.file;
    let model = resolve_model(&a.model, f, "table2-null")?;
    let statistic_kind: StatisticKind = a
        .statistic
        .as_deref()
        .or(f.statistic.as_deref())
        .unwrap_or("presence")
        .parse()
        .map_err(usage_from)?;
    let h = parse_step(a.h.as_deref().or(f.h.as_deref()).unwrap_or("5min"))?;
    let base = McExperiment::new(model, a.n.or(f.n).unwrap_or(1000), h, statistic_kind);
    let exp = McExperiment {
        v: a.v.or(f.v).unwrap_or(base.v),
        beta: a.beta.or(f.beta).unwrap_or(base.beta),
        trials: a.trials.or(f.trials).unwrap_or(base.trials),
        master_seed: a.seed.or(f.seed).unwrap_or(0),
        critical_value: a.critical_value.or(f.critical_value).unwrap_or(base.critical_value),
        retain_statistics: a.keep_statistics,
        ..base
    };
    exp.validate().map_err(usage_from)?;
    let exec = execution(a.workers.or(f.workers))?;
    let report = run_experiment_with(&exp, exec).map_err(usage_from)?;
    eprintln!("mc-run: {} trials in {:.2}s", exp.trials, report.wall_time.as_secs_f64());

    let finite = report.finite_statistics();
    let diagnostics = (finite.len() >= MIN_DIAGNOSTIC_SAMPLE)
        .then(|| normality_diagnostics(&finite))
        .transpose()
        .map_err(usage_from)?;
    let banner = Banner { tool: "threshtest", version: VERSION, command: "mc-run", seed: exp.master_seed, config: &exp };
    match ctx.format {
        Format::Json => emit_json(
            ctx,
            &json!({
                "banner": banner,
                "record": report.record(),
                "pct_non_degenerate": report.pct_non_degenerate,
                "all_degenerate": report.all_degenerate,
                "notes": report.notes,
                "statistics": report.statistics,
                "diagnostics": diagnostics,
            }),
        )?,
        Format::Text => {
            let mut s = banner.text();
            s.push_str(&format!(
                "trials {}  rejections {}  degenerate {}  pct {:.4}  (se {:.4})\n",
                exp.trials,
                report.rejections,
                report.degenerates,
                report.pct,
                report.standard_error()
            ));
            if report.all_degenerate {
                s.push_str("warning: every trial was degenerate\n");
            }
            for note in &report.notes {
                s.push_str(&format!("note: {note}\n"));
            }
            if let Some(d) = diagnostics {
                s.push_str(&format!(
                    "statistics: mean {:.4}  var {:.4}  skew {:.4}  exkurt {:.4}  KS {:.4} (p = {:.4})\n",
                    d.mean, d.variance, d.skewness, d.excess_kurtosis, d.ks_distance, d.ks_p_value
                ));
            }
            emit(ctx, &s)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn column_ref(s: &str) -> ColumnRef {
    s.parse().map_or_else(|_| ColumnRef::Name(s.to_string()), ColumnRef::Index)
}

#[derive(Serialize)]
struct AnalyzeConfig<'a> {
    input: &'a Path,
    format: &'a InputFormat,
    exclude_overnight: bool,
    spacing_tolerance: f64,
    analysis: &'a AnalysisConfig,
}

fn analyze(ctx: &Context_, a: AnalyzeArgs) -> Result<ExitCode> {
    let f = &ctx.file;
    let delimiter = a.delimiter.as_deref().or(f.delimiter.as_deref()).unwrap_or(",");
    let delimiter = match delimiter.as_bytes() {
        [b] => *b,
        _ if delimiter == "\\t" || delimiter == "tab" => b'\t',
        _ => return Err(usage(format!("delimiter must be a single byte, got {delimiter:?}"))),
    };
    let timestamp_column = a.timestamp_column.as_deref().or(f.timestamp_column.as_deref()).map(column_ref);
    let price_column = a.price_column.as_deref().or(f.price_column.as_deref()).map(column_ref);
    let calendar = match (a.session_gap.or(f.session_gap), a.utc_offset_minutes.or(f.utc_offset_minutes)) {
        (Some(g), _) => SessionCalendar::GapBreak { min_gap_seconds: g },
        (None, Some(off)) => SessionCalendar::Daily { utc_offset_minutes: off },
        (None, None) => {
            if a.exclude_overnight || f.exclude_overnight.unwrap_or(false) {
                SessionCalendar::Daily { utc_offset_minutes: 0 }
            } else {
                SessionCalendar::Continuous
            }
        }
    };
    let defaults = InputFormat::default();
    let input_format = InputFormat {
        delimiter,
        header: if timestamp_column.as_ref().is_some_and(|c| matches!(c, ColumnRef::Name(_)))
            || price_column.as_ref().is_some_and(|c| matches!(c, ColumnRef::Name(_)))
        {
            HeaderMode::Present
        } else {
            HeaderMode::Auto
        },
        timestamp_column: timestamp_column.unwrap_or(defaults.timestamp_column),
        price_column: price_column.unwrap_or(defaults.price_column),
        calendar,
    };
    let exclude = a.exclude_overnight || f.exclude_overnight.unwrap_or(false);
    let tolerance = a.spacing_tolerance.or(f.spacing_tolerance).unwrap_or(DEFAULT_SPACING_TOLERANCE);
    let base = AnalysisConfig::default();
    let analysis = AnalysisConfig {
        beta: a.beta.or(f.beta).unwrap_or(base.beta),
        v: a.v.or(f.v).unwrap_or(base.v),
        seed: a.seed.or(f.seed).unwrap_or(base.seed),
        critical_value: a.critical_value.or(f.critical_value).unwrap_or(base.critical_value),
        batch_size: a.batch.or(f.batch).unwrap_or(base.batch_size),
    };

    let file = File::open(&a.input).with_context(|| format!("opening {}", a.input.display()))?;
    let series = load_price_series(BufReader::new(file), &input_format)
        .with_context(|| format!("reading {}", a.input.display()))?;
    let returns = to_log_returns_with_tolerance(&series, exclude, tolerance)
        .with_context(|| format!("building returns from {}", a.input.display()))?;
    let report = analyze_series(&returns.increments, returns.h, &analysis)?;

    if let Some(dump) = &a.dump_decomposition {
        let spec = ThresholdSpec::with_beta(analysis.beta)?;
        let r = threshold_value(returns.h, &spec)?;
        let (kept, jumps) = decompose_increments(&returns.increments, r)?;
        let mut s = String::from("index,increment,kept,jump\n");
        for (i, x) in returns.increments.iter().enumerate() {
            s.push_str(&format!("{i},{x:e},{:e},{:e}\n", kept[i], jumps[i]));
        }
        std::fs::write(dump, s).with_context(|| format!("writing {}", dump.display()))?;
    }

    let cfg = AnalyzeConfig {
        input: &a.input,
        format: &input_format,
        exclude_overnight: exclude,
        spacing_tolerance: tolerance,
        analysis: &analysis,
    };
    let banner = Banner { tool: "threshtest", version: VERSION, command: "analyze", seed: analysis.seed, config: &cfg };
    match ctx.format {
        Format::Json => emit_json(
            ctx,
            &json!({
                "banner": banner,
                "observations": series.len(),
                "returns": {
                    "count": returns.increments.len(),
                    "h": returns.h,
                    "modal_spacing_ms": returns.modal_spacing_ms,
                    "sessions": returns.sessions,
                    "dropped_boundary_returns": returns.dropped_boundary_returns,
                },
                "report": report,
            }),
        )?,
        Format::Text => {
            let mut s = banner.text();
            s.push_str(&format!(
                "observations {}  returns {}  sessions {}  dropped boundary returns {}\n",
                series.len(),
                returns.increments.len(),
                returns.sessions,
                returns.dropped_boundary_returns
            ));
            s.push_str(&format!(
                "h = {:e} years  batches {} of {}  dropped increments {}\n",
                returns.h, report.batches, report.batch_size, report.dropped_increments
            ));
            s.push_str(&format!(
                "stage 1 (finite variation): {:.1}% of batches outside [-{cv}, {cv}]  (bound {:.1}%) -> {}\n",
                100.0 * report.activity_outside_fraction,
                100.0 * report.retention_bound,
                if report.finite_variation_retained { "retained" } else { "rejected" },
                cv = analysis.critical_value,
            ));
            if report.finite_variation_retained {
                s.push_str(&format!(
                    "stage 2 (Brownian presence): {}\n",
                    if report.presence_all_reject {
                        "every batch rejects sigma = 0"
                    } else {
                        "not every batch rejects sigma = 0"
                    }
                ));
            }
            s.push_str("\nbatch  U_activity  U_presence\n");
            for b in &report.per_batch {
                s.push_str(&format!(
                    "{:>5}  {:>10}  {:>10}\n",
                    b.batch_index,
                    fmt_stat(b.activity_outcome.statistic),
                    b.presence_outcome.as_ref().map_or("-".to_string(), |o| fmt_stat(o.statistic))
                ));
            }
            emit(ctx, &s)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn fmt_stat(s: Option<f64>) -> String {
    s.map_or("degenerate".to_string(), |u| format!("{u:.3}"))
}
