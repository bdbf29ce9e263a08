//! Step lengths in year units.
//!
//! A year has 252 trading days of 7 hours (84 five-minute bars).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error};

pub const TRADING_DAYS_PER_YEAR: f64 = 252.0;
pub const SESSION_SECONDS: f64 = 7.0 * 3600.0;

pub const ONE_MINUTE: f64 = 1.0 / (252.0 * 420.0);
pub const FIVE_MINUTES: f64 = 1.0 / (252.0 * 84.0);
pub const ONE_HOUR: f64 = 1.0 / (252.0 * 7.0);
pub const ONE_DAY: f64 = 1.0 / 252.0;

/// Observation step, either one of the named grid spacings or a raw year fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSize {
    OneMinute,
    FiveMinutes,
    OneHour,
    OneDay,
    Years(f64),
}

impl StepSize {
    pub fn years(self) -> f64 {
        match self {
            StepSize::OneMinute => ONE_MINUTE,
            StepSize::FiveMinutes => FIVE_MINUTES,
            StepSize::OneHour => ONE_HOUR,
            StepSize::OneDay => ONE_DAY,
            StepSize::Years(h) => h,
        }
    }
}

impl fmt::Display for StepSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSize::OneMinute => write!(f, "1 min"),
            StepSize::FiveMinutes => write!(f, "5 min"),
            StepSize::OneHour => write!(f, "1 hour"),
            StepSize::OneDay => write!(f, "1 day"),
            StepSize::Years(h) => write!(f, "{h:e}"),
        }
    }
}

impl FromStr for StepSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "1min" => Ok(StepSize::OneMinute),
            "5min" => Ok(StepSize::FiveMinutes),
            "1hour" => Ok(StepSize::OneHour),
            "1day" => Ok(StepSize::OneDay),
            other => {
                let h: f64 = other
                    .parse()
                    .map_err(|_| invalid(format!("unrecognised step size {other:?}")))?;
                if !(h.is_finite() && h > 0.0) {
                    return Err(invalid(format!("step size must be positive, got {h}")));
                }
                Ok(StepSize::Years(h))
            }
        }
    }
}

/// Year fraction of a sampling interval given in seconds. Whole-day spacings
/// count as trading days, anything shorter as a share of a 7-hour session.
pub fn seconds_to_years(seconds: f64) -> f64 {
    const DAY: f64 = 86_400.0;
    if seconds >= DAY && (seconds / DAY).fract() == 0.0 {
        seconds / DAY / TRADING_DAYS_PER_YEAR
    } else {
        seconds / SESSION_SECONDS / TRADING_DAYS_PER_YEAR
    }
}
