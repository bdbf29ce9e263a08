//! Price files to batched log-returns, and the two-stage empirical test.

mod analysis;
mod returns;
mod series;

pub use analysis::{analyze_series, retention_bound, AnalysisConfig, BatchRecord, BatchReport};
pub use returns::{batch, to_log_returns, to_log_returns_with_tolerance, Batches, LogReturns, DEFAULT_SPACING_TOLERANCE};
pub use series::{load_price_series, ColumnRef, HeaderMode, InputFormat, PriceSeries, SessionCalendar};
