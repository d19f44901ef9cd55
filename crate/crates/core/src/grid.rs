//! Previous-tick resampling of raw trades onto a regular intraday grid.
//!
//! A day's grid has `expected_returns + 1` instants, `open, open + step, ...,
//! close`. The price at each instant is the last trade at or before it on the
//! same calendar day, so the first grid price starts the day's return chain
//! and no return spans an overnight gap.

use std::fmt;

use chrono::{Duration, NaiveDate, NaiveDateTime, NaiveTime};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tick {
    pub timestamp: NaiveDateTime,
    pub price: f64,
}

/// Trades for one instrument, ordered by timestamp.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TickSeries {
    ticks: Vec<Tick>,
}

impl TickSeries {
    /// Validates ordering (non-decreasing timestamps) and positivity of prices.
    pub fn new(ticks: Vec<Tick>) -> Result<Self> {
        for (i, t) in ticks.iter().enumerate() {
            if !(t.price.is_finite() && t.price > 0.0) {
                return Err(Error::NonPositivePrice { index: i, price: t.price });
            }
            if i > 0 && t.timestamp < ticks[i - 1].timestamp {
                return Err(Error::UnsortedTicks { index: i });
            }
        }
        Ok(Self { ticks })
    }

    pub fn ticks(&self) -> &[Tick] {
        &self.ticks
    }

    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ticks.is_empty()
    }

    /// Distinct calendar days present, in order.
    pub fn dates(&self) -> Vec<NaiveDate> {
        let mut out: Vec<NaiveDate> = Vec::new();
        for t in &self.ticks {
            let d = t.timestamp.date();
            if out.last() != Some(&d) {
                out.push(d);
            }
        }
        out
    }

    /// Ticks falling on `date`.
    pub fn day(&self, date: NaiveDate) -> &[Tick] {
        let start = self.ticks.partition_point(|t| t.timestamp.date() < date);
        let end = self.ticks.partition_point(|t| t.timestamp.date() <= date);
        &self.ticks[start..end]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    session_open: NaiveTime,
    session_close: NaiveTime,
    step: Duration,
    expected_returns: usize,
}

impl GridSpec {
    pub fn new(
        session_open: NaiveTime,
        session_close: NaiveTime,
        step: Duration,
        expected_returns: usize,
    ) -> Result<Self> {
        if step <= Duration::zero() {
            return Err(Error::InvalidGridSpec("step must be positive".into()));
        }
        if expected_returns == 0 {
            return Err(Error::InvalidGridSpec("expected_returns must be positive".into()));
        }
        let span = session_close - session_open;
        if span <= Duration::zero() {
            return Err(Error::InvalidGridSpec("session must close after it opens".into()));
        }
        let (span_ms, step_ms) = (span.num_milliseconds(), step.num_milliseconds());
        if step_ms == 0 || span_ms % step_ms != 0 || (span_ms / step_ms) as usize != expected_returns {
            return Err(Error::InvalidGridSpec(format!(
                "session {session_open}-{session_close} with step {}s does not give {expected_returns} returns",
                step.num_seconds()
            )));
        }
        Ok(Self { session_open, session_close, step, expected_returns })
    }

    pub fn session_open(&self) -> NaiveTime {
        self.session_open
    }

    pub fn session_close(&self) -> NaiveTime {
        self.session_close
    }

    pub fn step(&self) -> Duration {
        self.step
    }

    pub fn expected_returns(&self) -> usize {
        self.expected_returns
    }

    /// The `expected_returns + 1` grid instants for `date`.
    pub fn instants(&self, date: NaiveDate) -> impl Iterator<Item = NaiveDateTime> + '_ {
        let open = date.and_time(self.session_open);
        (0..=self.expected_returns as i32).map(move |j| open + self.step * j)
    }
}

impl Default for GridSpec {
    /// 09:00 to 16:00 in 5-minute steps: 84 returns.
    fn default() -> Self {
        Self::new(
            NaiveTime::from_hms_opt(9, 0, 0).unwrap(),
            NaiveTime::from_hms_opt(16, 0, 0).unwrap(),
            Duration::minutes(5),
            84,
        )
        .expect("default grid spec is consistent")
    }
}

/// One day's intraday log returns, with the grid prices when they are known.
///
/// Days read from an already-gridded file carry returns only.
#[derive(Debug, Clone, PartialEq)]
pub struct DayGrid {
    pub date: NaiveDate,
    pub grid_prices: Option<Vec<f64>>,
    pub returns: Vec<f64>,
}

impl DayGrid {
    pub fn from_prices(date: NaiveDate, grid_prices: Vec<f64>) -> Result<Self> {
        let returns = log_returns(&grid_prices)?;
        Ok(Self { date, grid_prices: Some(grid_prices), returns })
    }

    pub fn from_returns(date: NaiveDate, returns: Vec<f64>) -> Self {
        Self { date, grid_prices: None, returns }
    }
}

/// `ln(p[i+1] / p[i])` for consecutive prices.
pub fn log_returns(prices: &[f64]) -> Result<Vec<f64>> {
    if let Some((index, &price)) = prices
        .iter()
        .enumerate()
        .find(|(_, p)| !(p.is_finite() && **p > 0.0))
    {
        return Err(Error::NonPositivePrice { index, price });
    }
    if prices.len() < 2 {
        return Err(Error::TooShort { needed: 2, got: prices.len() });
    }
    Ok(prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect())
}

/// Grid prices for `date` using the last tick at or before each grid instant.
pub fn previous_tick_resample(ticks: &TickSeries, spec: &GridSpec, date: NaiveDate) -> Result<DayGrid> {
    let day = ticks.day(date);
    if day.is_empty() {
        return Err(Error::EmptyDay(date));
    }
    let mut prices = Vec::with_capacity(spec.expected_returns + 1);
    let mut cursor = 0usize;
    let mut last: Option<f64> = None;
    for instant in spec.instants(date) {
        while cursor < day.len() && day[cursor].timestamp <= instant {
            last = Some(day[cursor].price);
            cursor += 1;
        }
        match last {
            Some(p) => prices.push(p),
            None => return Err(Error::NoPriceBeforeOpen(date)),
        }
    }
    DayGrid::from_prices(date, prices)
}

#[derive(Debug, Clone, PartialEq)]
pub enum RejectReason {
    WrongLength { expected: usize, got: usize },
    NonFinite { index: usize },
    EmptyDay,
    NoPriceBeforeOpen,
    DegenerateDay,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::WrongLength { expected, got } => {
                write!(f, "WrongLength(expected {expected}, got {got})")
            }
            RejectReason::NonFinite { index } => write!(f, "NonFinite(return {})", index + 1),
            RejectReason::EmptyDay => f.write_str("EmptyDay"),
            RejectReason::NoPriceBeforeOpen => f.write_str("NoPriceBeforeOpen"),
            RejectReason::DegenerateDay => f.write_str("DegenerateDay"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DayDecision {
    Accept,
    Reject(RejectReason),
}

impl DayDecision {
    pub fn is_accept(&self) -> bool {
        matches!(self, DayDecision::Accept)
    }
}

pub fn validate_day(day: &DayGrid, spec: &GridSpec) -> DayDecision {
    validate_returns(&day.returns, spec.expected_returns)
}

pub(crate) fn validate_returns(returns: &[f64], expected: usize) -> DayDecision {
    if returns.len() != expected {
        return DayDecision::Reject(RejectReason::WrongLength { expected, got: returns.len() });
    }
    match returns.iter().position(|r| !r.is_finite()) {
        Some(index) => DayDecision::Reject(RejectReason::NonFinite { index }),
        None => DayDecision::Accept,
    }
}

/// A day dropped from the pipeline, with the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    pub date: NaiveDate,
    pub reason: RejectReason,
}

/// Resamples every day present in `ticks`. Days that cannot be gridded or
/// fail validation are returned as rejections rather than padded.
pub fn resample_all(ticks: &TickSeries, spec: &GridSpec) -> (Vec<DayGrid>, Vec<Rejection>) {
    let mut days = Vec::new();
    let mut rejected = Vec::new();
    for date in ticks.dates() {
        let reason = match previous_tick_resample(ticks, spec, date) {
            Ok(day) => match validate_day(&day, spec) {
                DayDecision::Accept => {
                    days.push(day);
                    continue;
                }
                DayDecision::Reject(r) => r,
            },
            Err(Error::EmptyDay(_)) => RejectReason::EmptyDay,
            Err(Error::NoPriceBeforeOpen(_)) => RejectReason::NoPriceBeforeOpen,
            // prices are validated on construction, so gridding cannot fail otherwise
            Err(e) => unreachable!("unexpected resampling error: {e}"),
        };
        log::warn!("dropping {date}: {reason}");
        rejected.push(Rejection { date, reason });
    }
    (days, rejected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn at(h: u32, m: u32, s: u32) -> NaiveDateTime {
        NaiveDate::from_ymd_opt(1997, 3, 14).unwrap().and_hms_opt(h, m, s).unwrap()
    }

    fn date() -> NaiveDate {
        NaiveDate::from_ymd_opt(1997, 3, 14).unwrap()
    }

    fn series(ticks: &[(NaiveDateTime, f64)]) -> TickSeries {
        TickSeries::new(ticks.iter().map(|&(timestamp, price)| Tick { timestamp, price }).collect()).unwrap()
    }

    /// Independent oracle: scan the whole list for the last tick at or before `t`.
    fn last_before(ticks: &[(NaiveDateTime, f64)], t: NaiveDateTime) -> Option<f64> {
        ticks.iter().rfind(|(ts, _)| *ts <= t).map(|(_, p)| *p)
    }

    #[test]
    fn tick_on_grid_instant_is_used() {
        let s = series(&[(at(9, 0, 0), 99.0), (at(9, 5, 0), 100.0)]);
        let g = previous_tick_resample(&s, &GridSpec::default(), date()).unwrap();
        assert_eq!(g.grid_prices.unwrap()[1], 100.0);
    }

    #[test]
    fn single_opening_tick_gives_flat_day() {
        let s = series(&[(at(9, 0, 0), 100.0)]);
        let g = previous_tick_resample(&s, &GridSpec::default(), date()).unwrap();
        assert!(g.grid_prices.as_ref().unwrap().iter().all(|&p| p == 100.0));
        assert_eq!(g.returns.len(), 84);
        assert!(g.returns.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn last_before_mapping() {
        let raw = [(at(9, 0, 0), 100.0), (at(9, 3, 0), 101.0), (at(9, 7, 0), 102.0)];
        let s = series(&raw);
        let spec = GridSpec::default();
        let g = previous_tick_resample(&s, &spec, date()).unwrap();
        let prices = g.grid_prices.unwrap();
        assert_eq!(&prices[..3], &[100.0, 101.0, 102.0]);
        for (p, t) in prices.iter().zip(spec.instants(date())) {
            assert_eq!(Some(*p), last_before(&raw, t));
        }
    }

    #[test]
    fn missing_open_is_rejected() {
        let s = series(&[(at(9, 0, 1), 100.0)]);
        let err = previous_tick_resample(&s, &GridSpec::default(), date()).unwrap_err();
        assert!(matches!(err, Error::NoPriceBeforeOpen(_)));
    }

    #[test]
    fn previous_day_ticks_do_not_carry_over() {
        let prev = NaiveDate::from_ymd_opt(1997, 3, 13).unwrap().and_hms_opt(15, 59, 0).unwrap();
        let s = series(&[(prev, 100.0), (at(9, 30, 0), 101.0)]);
        let err = previous_tick_resample(&s, &GridSpec::default(), date()).unwrap_err();
        assert!(matches!(err, Error::NoPriceBeforeOpen(_)));
    }

    #[test]
    fn empty_day() {
        let s = series(&[(at(9, 0, 0), 100.0)]);
        let other = NaiveDate::from_ymd_opt(1997, 3, 17).unwrap();
        assert!(matches!(
            previous_tick_resample(&s, &GridSpec::default(), other),
            Err(Error::EmptyDay(_))
        ));
    }

    #[test]
    fn tick_series_validation() {
        let bad_price = TickSeries::new(vec![Tick { timestamp: at(9, 0, 0), price: 0.0 }]);
        assert!(matches!(bad_price, Err(Error::NonPositivePrice { .. })));
        let unsorted = TickSeries::new(vec![
            Tick { timestamp: at(9, 1, 0), price: 1.0 },
            Tick { timestamp: at(9, 0, 0), price: 1.0 },
        ]);
        assert!(matches!(unsorted, Err(Error::UnsortedTicks { index: 1 })));
    }

    #[test]
    fn grid_spec_consistency() {
        let t = |h| NaiveTime::from_hms_opt(h, 0, 0).unwrap();
        assert!(GridSpec::new(t(9), t(16), Duration::minutes(5), 83).is_err());
        assert!(GridSpec::new(t(9), t(16), Duration::zero(), 84).is_err());
        assert!(GridSpec::new(t(9), t(16), Duration::minutes(5), 84).is_ok());
        assert_eq!(GridSpec::default().instants(date()).count(), 85);
    }

    #[test]
    fn log_returns_examples() {
        assert_eq!(log_returns(&[100.0, 100.0, 100.0]).unwrap(), vec![0.0, 0.0]);
        let r = log_returns(&[1.0, std::f64::consts::E]).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-15);
        assert!(matches!(log_returns(&[1.0]), Err(Error::TooShort { .. })));
        assert!(matches!(log_returns(&[1.0, -2.0]), Err(Error::NonPositivePrice { index: 1, .. })));
    }

    #[test]
    fn log_returns_match_elementwise_oracle() {
        // xorshift stream, independent of the simulate module
        let mut state = 0x9E3779B97F4A7C15_u64;
        let prices: Vec<f64> = (0..85)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                50.0 + 100.0 * (state >> 11) as f64 / (1u64 << 53) as f64
            })
            .collect();
        let r = log_returns(&prices).unwrap();
        assert_eq!(r.len(), 84);
        for i in 0..84 {
            let oracle = prices[i + 1].ln() - prices[i].ln();
            assert!((r[i] - oracle).abs() <= 1e-12 * oracle.abs().max(1e-300) + 1e-15);
        }
    }

    #[test]
    fn validate_day_decisions() {
        let spec = GridSpec::default();
        let ok = DayGrid::from_returns(date(), vec![0.001; 84]);
        assert_eq!(validate_day(&ok, &spec), DayDecision::Accept);
        let short = DayGrid::from_returns(date(), vec![0.001; 83]);
        assert_eq!(
            validate_day(&short, &spec),
            DayDecision::Reject(RejectReason::WrongLength { expected: 84, got: 83 })
        );
        let mut nan = vec![0.001; 84];
        nan[10] = f64::NAN;
        assert_eq!(
            validate_day(&DayGrid::from_returns(date(), nan), &spec),
            DayDecision::Reject(RejectReason::NonFinite { index: 10 })
        );
    }

    #[test]
    fn resample_all_logs_rejections() {
        let d2 = NaiveDate::from_ymd_opt(1997, 3, 17).unwrap();
        let s = series(&[
            (at(8, 59, 0), 100.0),
            (at(12, 0, 0), 101.0),
            (d2.and_hms_opt(9, 10, 0).unwrap(), 100.0),
        ]);
        let (days, rejected) = resample_all(&s, &GridSpec::default());
        assert_eq!(days.len(), 1);
        assert_eq!(days[0].date, date());
        assert_eq!(rejected, vec![Rejection { date: d2, reason: RejectReason::NoPriceBeforeOpen }]);
    }

    fn arb_ticks() -> impl Strategy<Value = Vec<(i64, f64)>> {
        // seconds after 08:55, prices in (1, 200)
        prop::collection::vec((0i64..7 * 3600 + 600, 1.0f64..200.0), 1..60).prop_map(|mut v| {
            v.sort_by_key(|x| x.0);
            v
        })
    }

    fn to_ticks(raw: &[(i64, f64)]) -> Vec<(NaiveDateTime, f64)> {
        raw.iter().map(|&(s, p)| (at(8, 55, 0) + Duration::seconds(s), p)).collect()
    }

    proptest! {
        #[test]
        fn telescoping_and_length(raw in arb_ticks()) {
            let mut ticks = to_ticks(&raw);
            ticks.insert(0, (at(8, 55, 0), 100.0));
            let spec = GridSpec::default();
            let g = previous_tick_resample(&series(&ticks), &spec, date()).unwrap();
            prop_assert_eq!(g.returns.len(), spec.expected_returns());
            let prices = g.grid_prices.unwrap();
            let total: f64 = g.returns.iter().sum();
            let ratio = prices[84] / prices[0];
            prop_assert!((total.exp() - ratio).abs() <= 1e-10 * ratio);
        }

        #[test]
        fn refinement_leaves_earlier_instants_unchanged(raw in arb_ticks(), extra in 0i64..7 * 3600, price in 1.0f64..200.0) {
            let mut ticks = to_ticks(&raw);
            ticks.insert(0, (at(8, 55, 0), 100.0));
            let spec = GridSpec::default();
            let base = previous_tick_resample(&series(&ticks), &spec, date()).unwrap();
            // strictly inside a grid interval
            let when = at(9, 0, 0) + Duration::seconds(extra - extra % 300 + 150);
            let pos = ticks.partition_point(|t| t.0 <= when);
            ticks.insert(pos, (when, price));
            let refined = previous_tick_resample(&series(&ticks), &spec, date()).unwrap();
            let (a, b) = (base.grid_prices.unwrap(), refined.grid_prices.unwrap());
            for (j, t) in spec.instants(date()).enumerate() {
                if t < when {
                    prop_assert_eq!(a[j], b[j]);
                }
            }
        }
    }
}
