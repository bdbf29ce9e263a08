use std::io::Read;

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// How observations are grouped into trading sessions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SessionCalendar {
    /// One uninterrupted session (FX style).
    #[default]
    Continuous,
    /// A new session on every calendar day, in local time `UTC + offset`.
    Daily { utc_offset_minutes: i32 },
    /// A new session after any gap of at least `min_gap_seconds`.
    GapBreak { min_gap_seconds: i64 },
}

impl SessionCalendar {
    /// Session label of every observation; labels are nondecreasing.
    pub fn sessions(&self, timestamps_ms: &[i64]) -> Vec<i64> {
        match *self {
            SessionCalendar::Continuous => vec![0; timestamps_ms.len()],
            SessionCalendar::Daily { utc_offset_minutes } => timestamps_ms
                .iter()
                .map(|t| (t + i64::from(utc_offset_minutes) * 60_000).div_euclid(86_400_000))
                .collect(),
            SessionCalendar::GapBreak { min_gap_seconds } => {
                let mut label = 0;
                let mut out = Vec::with_capacity(timestamps_ms.len());
                for (i, t) in timestamps_ms.iter().enumerate() {
                    if i > 0 && t - timestamps_ms[i - 1] >= min_gap_seconds * 1000 {
                        label += 1;
                    }
                    out.push(label);
                }
                out
            }
        }
    }
}

/// Strictly increasing timestamps (epoch milliseconds) with positive prices.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    timestamps_ms: Vec<i64>,
    prices: Vec<f64>,
    pub calendar: SessionCalendar,
}

impl PriceSeries {
    pub fn new(timestamps_ms: Vec<i64>, prices: Vec<f64>, calendar: SessionCalendar) -> Result<Self> {
        if timestamps_ms.len() != prices.len() {
            return Err(invalid("timestamps and prices differ in length"));
        }
        if prices.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(i) = prices.iter().position(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(invalid(format!("price {i} is not positive ({})", prices[i])));
        }
        if let Some(i) = timestamps_ms.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::OutOfOrder { previous: i, current: i + 1 });
        }
        Ok(Self { timestamps_ms, prices, calendar })
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn timestamps_ms(&self) -> &[i64] {
        &self.timestamps_ms
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeaderMode {
    /// The first row is a header when its price field is not a number.
    #[default]
    Auto,
    Present,
    Absent,
}

/// Layout of a delimited price file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputFormat {
    pub delimiter: u8,
    pub header: HeaderMode,
    pub timestamp_column: ColumnRef,
    pub price_column: ColumnRef,
    pub calendar: SessionCalendar,
}

impl Default for InputFormat {
    fn default() -> Self {
        Self {
            delimiter: b',',
            header: HeaderMode::Auto,
            timestamp_column: ColumnRef::Index(0),
            price_column: ColumnRef::Index(1),
            calendar: SessionCalendar::Continuous,
        }
    }
}

/// Integer epoch seconds, RFC 3339, or a naive `YYYY-MM-DD[T ]HH:MM:SS[.f]`
/// read as UTC. Returns epoch milliseconds.
fn parse_timestamp(field: &str) -> Option<i64> {
    let field = field.trim();
    if let Ok(secs) = field.parse::<i64>() {
        return secs.checked_mul(1000);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(field) {
        return Some(dt.timestamp_millis());
    }
    ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(field, f).ok())
        .map(|dt| dt.and_utc().timestamp_millis())
}

fn resolve(column: &ColumnRef, header: Option<&csv::StringRecord>, what: &str) -> Result<usize> {
    match column {
        ColumnRef::Index(i) => Ok(*i),
        ColumnRef::Name(name) => header
            .and_then(|h| h.iter().position(|c| c.trim() == name))
            .ok_or_else(|| invalid(format!("{what} column {name:?} not found in header"))),
    }
}

pub fn load_price_series<R: Read>(source: R, format: &InputFormat) -> Result<PriceSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(source);

    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::Parse { line, message: e.to_string() }
        })?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line() as usize);
        records.push((line, rec));
    }
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }

    let header_present = match format.header {
        HeaderMode::Present => true,
        HeaderMode::Absent => false,
        HeaderMode::Auto => {
            let first = &records[0].1;
            let price_idx = resolve(&format.price_column, Some(first), "price").unwrap_or(usize::MAX);
            first.get(price_idx).is_none_or(|f| f.parse::<f64>().is_err())
        }
    };
    let header = header_present.then(|| records[0].1.clone());
    let ts_idx = resolve(&format.timestamp_column, header.as_ref(), "timestamp")?;
    let price_idx = resolve(&format.price_column, header.as_ref(), "price")?;
    let body = &records[usize::from(header_present)..];
    if body.is_empty() {
        return Err(Error::EmptyInput);
    }

    let mut timestamps = Vec::with_capacity(body.len());
    let mut prices = Vec::with_capacity(body.len());
    for (line, rec) in body {
        let line = *line;
        let ts_field = rec
            .get(ts_idx)
            .ok_or_else(|| Error::Parse { line, message: format!("missing timestamp column {ts_idx}") })?;
        let ts = parse_timestamp(ts_field)
            .ok_or_else(|| Error::Parse { line, message: format!("unparseable timestamp {ts_field:?}") })?;
        let price_field = rec
            .get(price_idx)
            .ok_or_else(|| Error::Parse { line, message: format!("missing price column {price_idx}") })?;
        let price: f64 = price_field
            .parse()
            .map_err(|_| Error::Parse { line, message: format!("unparseable price {price_field:?}") })?;
        if !(price.is_finite() && price > 0.0) {
            return Err(Error::Parse { line, message: format!("price must be positive, got {price}") });
        }
        if let Some(&prev) = timestamps.last() {
            if ts <= prev {
                let current = timestamps.len();
                return Err(Error::OutOfOrder { previous: current - 1, current });
            }
        }
        timestamps.push(ts);
        prices.push(price);
    }
    PriceSeries::new(timestamps, prices, format.calendar)
}
