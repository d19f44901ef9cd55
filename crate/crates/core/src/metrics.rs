//! Per-day log realized variance and variance ratios.

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{validate_returns, DayDecision, DayGrid, RejectReason, Rejection};
use crate::realized::{realized_variance, RvSeries};
use crate::regress::VrSeries;
use crate::series::DatedSeries;
use crate::vr::variance_ratio;

#[derive(Debug, Clone, PartialEq)]
pub struct DailyMetrics {
    pub date: NaiveDate,
    pub log_rv: f64,
    /// One entry per q of the owning table.
    pub vr: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTable {
    pub qs: Vec<usize>,
    pub rows: Vec<DailyMetrics>,
}

impl MetricsTable {
    pub fn new(qs: Vec<usize>, rows: Vec<DailyMetrics>) -> Result<Self> {
        if let Some(w) = rows.windows(2).find(|w| w[1].date <= w[0].date) {
            return Err(Error::UnorderedDates(w[1].date));
        }
        if let Some(r) = rows.iter().find(|r| r.vr.len() != qs.len()) {
            return Err(Error::Alignment(format!("{}: {} ratios for {} q values", r.date, r.vr.len(), qs.len())));
        }
        Ok(Self { qs, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.rows.iter().map(|r| r.date).collect()
    }

    pub fn log_rv(&self) -> DatedSeries {
        DatedSeries::new(self.dates(), self.rows.iter().map(|r| r.log_rv).collect())
            .expect("table dates are ordered")
    }

    pub fn rv_series(&self) -> Result<RvSeries> {
        RvSeries::from_log_rv(&self.dates(), &self.rows.iter().map(|r| r.log_rv).collect::<Vec<_>>())
    }

    pub fn vr(&self, q: usize) -> Option<VrSeries> {
        let k = self.qs.iter().position(|&x| x == q)?;
        let values = self.rows.iter().map(|r| r.vr[k]).collect();
        Some(VrSeries::new(q, DatedSeries::new(self.dates(), values).expect("table dates are ordered")))
    }
}

/// Metrics for a single accepted day. Zero realized variance or zero
/// one-period variance makes the day degenerate.
pub fn day_metrics(day: &DayGrid, qs: &[usize]) -> Result<DailyMetrics> {
    let rv = realized_variance(&day.returns)?;
    if rv <= 0.0 {
        return Err(Error::DegenerateDay);
    }
    let vr = qs
        .iter()
        .map(|&q| variance_ratio(&day.returns, q).map(|s| s.vr))
        .collect::<Result<Vec<_>>>()?;
    Ok(DailyMetrics { date: day.date, log_rv: rv.ln(), vr })
}

/// Validates every day and computes its metrics. Invalid and degenerate
/// days are returned as rejections.
pub fn compute_metrics(days: &[DayGrid], expected_returns: usize, qs: &[usize]) -> Result<(MetricsTable, Vec<Rejection>)> {
    let outcomes: Vec<std::result::Result<DailyMetrics, Rejection>> = days
        .par_iter()
        .map(|day| {
            let reject = |reason| Err(Rejection { date: day.date, reason });
            if let DayDecision::Reject(reason) = validate_returns(&day.returns, expected_returns) {
                return Ok(reject(reason));
            }
            match day_metrics(day, qs) {
                Ok(m) => Ok(Ok(m)),
                Err(Error::DegenerateDay) => Ok(reject(RejectReason::DegenerateDay)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(days.len());
    let mut rejected = Vec::new();
    for o in outcomes {
        match o {
            Ok(m) => rows.push(m),
            Err(r) => {
                log::warn!("dropping {}: {}", r.date, r.reason);
                rejected.push(r);
            }
        }
    }
    Ok((MetricsTable::new(qs.to_vec(), rows)?, rejected))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2010, 2, day).unwrap()
    }

    #[test]
    fn degenerate_and_invalid_days_are_rejected() {
        let alternating: Vec<f64> = (0..84).map(|i| if i % 2 == 0 { 0.001 } else { -0.001 }).collect();
        let days = vec![
            DayGrid::from_returns(d(1), vec![0.0; 84]),
            DayGrid::from_returns(d(2), alternating),
            DayGrid::from_returns(d(3), vec![0.001; 80]),
        ];
        let (table, rejected) = compute_metrics(&days, 84, &[2, 3]).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(table.rows[0].vr[0], 0.0);
        assert_eq!(rejected[0].reason, RejectReason::DegenerateDay);
        assert!(matches!(rejected[1].reason, RejectReason::WrongLength { .. }));
        assert_eq!(table.vr(2).unwrap().series.values(), &[0.0]);
        assert!(table.vr(6).is_none());
    }
}
