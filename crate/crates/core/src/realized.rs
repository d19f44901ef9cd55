//! Realized variance and heterogeneous averages of log realized variance.

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

pub const WEEKLY: usize = 5;
pub const MONTHLY: usize = 22;

/// Sum of squared intraday returns.
pub fn realized_variance(returns: &[f64]) -> Result<f64> {
    if returns.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(compensated_sum(returns.iter().map(|r| r * r)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RvEntry {
    pub date: NaiveDate,
    pub rv: f64,
    pub log_rv: f64,
}

/// Daily realized variance over accepted trading days. Lags are taken over
/// this sequence, so dropped days do not exist for lagging purposes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RvSeries {
    entries: Vec<RvEntry>,
}

impl RvSeries {
    pub fn from_rv(dates: &[NaiveDate], rv: &[f64]) -> Result<Self> {
        if dates.len() != rv.len() {
            return Err(Error::Alignment(format!("{} dates for {} values", dates.len(), rv.len())));
        }
        let entries = dates
            .iter()
            .zip(rv)
            .map(|(&date, &rv)| RvEntry { date, rv, log_rv: rv.ln() })
            .collect();
        Self::new(entries)
    }

    /// Builds a series directly from log RV values (e.g. read back from a
    /// metrics file, or a simulated log-variance path).
    pub fn from_log_rv(dates: &[NaiveDate], log_rv: &[f64]) -> Result<Self> {
        if dates.len() != log_rv.len() {
            return Err(Error::Alignment(format!(
                "{} dates for {} values",
                dates.len(),
                log_rv.len()
            )));
        }
        let entries = dates
            .iter()
            .zip(log_rv)
            .map(|(&date, &log_rv)| RvEntry { date, rv: log_rv.exp(), log_rv })
            .collect();
        Self::new(entries)
    }

    fn new(entries: Vec<RvEntry>) -> Result<Self> {
        for (i, e) in entries.iter().enumerate() {
            if !(e.rv > 0.0 && e.log_rv.is_finite()) {
                return Err(Error::NonPositiveRv(e.date));
            }
            if i > 0 && e.date <= entries[i - 1].date {
                return Err(Error::UnorderedDates(e.date));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[RvEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.entries.iter().map(|e| e.date).collect()
    }

    pub fn log_rv(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.log_rv).collect()
    }

    /// Contiguous sub-series `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self { entries: self.entries[start..end].to_vec() }
    }
}

/// Mean of `log_rv` over the `horizon` entries immediately before index `t`.
pub fn heterogeneous_average(series: &RvSeries, t: usize, horizon: usize) -> Result<f64> {
    if horizon == 0 || t < horizon || t > series.len() {
        return Err(Error::InsufficientHistory { needed: horizon.max(1), available: t.min(series.len()) });
    }
    let window = &series.entries[t - horizon..t];
    Ok(compensated_sum(window.iter().map(|e| e.log_rv)) / horizon as f64)
}
