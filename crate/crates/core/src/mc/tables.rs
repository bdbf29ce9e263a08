//! The published power-study grids: nine (n, h, v) rows, each run under a
//! null and an alternative column.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::Serialize;

use super::{run_experiment_with, Execution, McExperiment, McReport, StatisticKind};
use crate::error::{invalid, Error, Result};
use crate::rng::derive_seed;
use crate::sim::{brownian_plus_compound_poisson, stable_plus_brownian, stochastic_vol_variance_gamma, ModelSpec};
use crate::time::StepSize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TableId {
    T1,
    T2,
    T3,
    T4,
    T5,
}

impl TableId {
    pub const ALL: [TableId; 5] = [TableId::T1, TableId::T2, TableId::T3, TableId::T4, TableId::T5];

    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn title(self) -> &'static str {
        match self {
            TableId::T1 => "Finite-variation test: alpha-stable process plus Brownian motion (sigma = 0.2)",
            TableId::T2 => "Brownian-presence test: Brownian motion plus compound Poisson jumps",
            TableId::T3 => "Brownian-presence test: Brownian motion plus alpha-stable process, alpha = 0.3",
            TableId::T4 => "Brownian-presence test: Brownian motion plus alpha-stable process, alpha = 1.2",
            TableId::T5 => "Brownian-presence test: stochastic volatility with variance gamma jumps",
        }
    }

    pub fn statistic_kind(self) -> StatisticKind {
        match self {
            TableId::T1 => StatisticKind::JumpActivity,
            _ => StatisticKind::BrownianPresence,
        }
    }

    /// Header symbol and the (label, model) of the two columns.
    fn columns(self) -> (&'static str, [(&'static str, ModelSpec); 2]) {
        match self {
            TableId::T1 => ("alpha", [("0.6", stable_plus_brownian(0.2, 0.6)), ("1.6", stable_plus_brownian(0.2, 1.6))]),
            TableId::T2 => ("sigma", [("0", brownian_plus_compound_poisson(0.0)), ("0.2", brownian_plus_compound_poisson(0.2))]),
            TableId::T3 => ("sigma", [("0", stable_plus_brownian(0.0, 0.3)), ("0.2", stable_plus_brownian(0.2, 0.3))]),
            TableId::T4 => ("sigma", [("0", stable_plus_brownian(0.0, 1.2)), ("0.2", stable_plus_brownian(0.2, 1.2))]),
            TableId::T5 => (
                "sigma",
                [("0", stochastic_vol_variance_gamma(false)), ("Stoch.", stochastic_vol_variance_gamma(true))],
            ),
        }
    }

    /// Published rejection frequencies, row-major, (null, alternative).
    pub fn published(self) -> [[f64; 2]; 9] {
        match self {
            TableId::T1 => [
                [0.067, 0.439],
                [0.056, 0.407],
                [0.047, 0.250],
                [0.053, 0.726],
                [0.049, 0.241],
                [0.051, 0.875],
                [0.066, 0.984],
                [0.065, 0.137],
                [0.065, 0.928],
            ],
            TableId::T2 => [
                [0.043, 1.0],
                [0.048, 1.0],
                [0.054, 1.0],
                [0.041, 1.0],
                [0.047, 1.0],
                [0.054, 1.0],
                [0.082, 1.0],
                [0.065, 1.0],
                [0.049, 1.0],
            ],
            TableId::T3 => [
                [0.042, 1.0],
                [0.026, 1.0],
                [0.054, 1.0],
                [0.053, 1.0],
                [0.046, 1.0],
                [0.140, 1.0],
                [0.805, 1.0],
                [0.056, 1.0],
                [0.165, 1.0],
            ],
            TableId::T4 => [
                [1.0, 1.0],
                [1.0, 1.0],
                [1.0, 1.0],
                [1.0, 1.0],
                [1.0, 1.0],
                [1.0, 1.0],
                [1.0, 1.0],
                [0.994, 1.0],
                [1.0, 1.0],
            ],
            TableId::T5 => [
                [0.032, 1.0],
                [0.017, 1.0],
                [0.027, 1.0],
                [0.054, 1.0],
                [0.034, 1.0],
                [0.918, 1.0],
                [1.000, 1.0],
                [0.049, 1.0],
                [0.912, 1.0],
            ],
        }
    }
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches(['T', 't']);
        match t {
            "1" => Ok(TableId::T1),
            "2" => Ok(TableId::T2),
            "3" => Ok(TableId::T3),
            "4" => Ok(TableId::T4),
            "5" => Ok(TableId::T5),
            _ => Err(invalid(format!("unknown table {s:?} (expected 1..5)"))),
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", self.number())
    }
}

/// One row of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableRow {
    pub n: usize,
    pub h: StepSize,
    pub v: f64,
}

pub const TABLE_ROWS: [TableRow; 9] = [
    TableRow { n: 1000, h: StepSize::FiveMinutes, v: 1e-6 },
    TableRow { n: 1000, h: StepSize::FiveMinutes, v: 1e-4 },
    TableRow { n: 1000, h: StepSize::FiveMinutes, v: 1e-2 },
    TableRow { n: 1000, h: StepSize::FiveMinutes, v: 1e-1 },
    TableRow { n: 1000, h: StepSize::OneMinute, v: 1e-4 },
    TableRow { n: 1000, h: StepSize::OneHour, v: 1e-4 },
    TableRow { n: 1000, h: StepSize::OneDay, v: 1e-4 },
    TableRow { n: 100, h: StepSize::FiveMinutes, v: 1e-4 },
    TableRow { n: 10_000, h: StepSize::FiveMinutes, v: 1e-4 },
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    pub row: usize,
    pub column: usize,
    pub column_label: String,
    pub published_pct: f64,
    pub report: McReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableReport {
    pub table: TableId,
    pub title: String,
    pub column_symbol: String,
    pub trials: usize,
    pub master_seed: u64,
    /// Row-major: (row 0, null), (row 0, alternative), (row 1, null), ...
    pub cells: Vec<CellReport>,
}

impl TableReport {
    pub fn reports(&self) -> impl Iterator<Item = &McReport> {
        self.cells.iter().map(|c| &c.report)
    }

    /// Aligned text table with the published values alongside.
    pub fn render_text(&self) -> String {
        let sym = &self.column_symbol;
        let mut out = String::new();
        let _ = writeln!(out, "Table {}: {}", self.table.number(), self.title);
        let _ = writeln!(out, "trials = {}, seed = {}", self.trials, self.master_seed);
        let _ = writeln!(
            out,
            "{:>6}  {:<7} {:>9}  {:>6} {:>6} {:>7}  {:>6} {:>6} {:>7}",
            "n", "h", "v", sym, "pct", "ref", sym, "pct", "ref"
        );
        for pair in self.cells.chunks(2) {
            let exp = &pair[0].report.experiment;
            let _ = write!(out, "{:>6}  {:<7} {:>9}", exp.n, exp.h.to_string(), format_v(exp.v));
            for cell in pair {
                let _ = write!(
                    out,
                    "  {:>6} {:>6.3} {:>7}",
                    cell.column_label,
                    cell.report.pct,
                    format_published(cell.published_pct)
                );
            }
            out.push('\n');
        }
        let degenerate: usize = self.reports().map(|r| r.degenerates).sum();
        if degenerate > 0 {
            let _ = writeln!(out, "degenerate trials (excluded from pct numerators): {degenerate}");
        }
        let mut notes: Vec<&String> = self.reports().flat_map(|r| &r.notes).collect();
        notes.dedup();
        for note in notes {
            let _ = writeln!(out, "note: {note}");
        }
        out
    }
}

fn format_v(v: f64) -> String {
    let s = format!("{v:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn format_published(p: f64) -> String {
    if p == 1.0 {
        "1".to_string()
    } else {
        format!("{p:.3}")
    }
}

/// Runs every cell of a table. Cell `k` (row-major) uses master seed
/// `derive_seed(master_seed, k)`.
pub fn reproduce_table(table: TableId, trials: usize, master_seed: u64) -> Result<TableReport> {
    reproduce_table_with(table, trials, master_seed, Execution::default())
}

pub fn reproduce_table_with(
    table: TableId,
    trials: usize,
    master_seed: u64,
    execution: Execution,
) -> Result<TableReport> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let (symbol, columns) = table.columns();
    let published = table.published();
    let mut cells = Vec::with_capacity(18);
    for (r, row) in TABLE_ROWS.iter().enumerate() {
        for (c, (label, model)) in columns.iter().enumerate() {
            let cell_index = (2 * r + c) as u64;
            let exp = McExperiment {
                v: row.v,
                trials,
                master_seed: derive_seed(master_seed, cell_index),
                ..McExperiment::new(*model, row.n, row.h, table.statistic_kind())
            };
            cells.push(CellReport {
                row: r,
                column: c,
                column_label: label.to_string(),
                published_pct: published[r][c],
                report: run_experiment_with(&exp, execution)?,
            });
        }
    }
    Ok(TableReport {
        table,
        title: table.title().to_string(),
        column_symbol: symbol.to_string(),
        trials,
        master_seed,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_ids() {
        assert_eq!("2".parse::<TableId>().unwrap(), TableId::T2);
        assert_eq!("T5".parse::<TableId>().unwrap(), TableId::T5);
        assert!("9".parse::<TableId>().is_err());
        assert!("0".parse::<TableId>().is_err());
    }

    #[test]
    fn zero_trials_is_invalid() {
        assert!(reproduce_table(TableId::T2, 0, 1).is_err());
    }

    #[test]
    fn layout_matches_grid() {
        let t = reproduce_table(TableId::T5, 2, 4).unwrap();
        assert_eq!(t.cells.len(), 18);
        for (k, cell) in t.cells.iter().enumerate() {
            assert_eq!((cell.row, cell.column), (k / 2, k % 2));
            assert_eq!(cell.report.experiment.n, TABLE_ROWS[k / 2].n);
        }
        let text = t.render_text();
        assert_eq!(text.lines().filter(|l| l.contains("Stoch.")).count(), 9);
        assert!(text.contains("0.000001"));
    }
}
