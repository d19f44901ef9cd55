//! Regressions of the daily variance ratio on volatility.
//!
//! Three specifications, each with an intercept `b`:
//!
//! - `simple`:     `VR_t = b + c log RV_t`
//! - `lagged`:     `VR_t = b + c0 log RV_t + c1 log RV_{t-1}`
//! - `decomposed`: `VR_t = b + coef_expected sigma_p,t + coef_unexpected sigma_u,t`
//!
//! Decomposed coefficients are named by regressor. Published tables for this
//! model label the coefficient on unexpected volatility `c_u` and the one on
//! predictable volatility `c_p`.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::har::{fit_har, HarFit};
use crate::ols::{design_with_intercept, ols_with, SeMode};
use crate::realized::RvSeries;
use crate::series::DatedSeries;

/// Minimum observations for a full-sample specification.
pub const MIN_REGRESSION_OBS: usize = 10;

/// Five years of trading days.
pub const DEFAULT_WINDOW: usize = 1250;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpecName {
    Simple,
    Lagged,
    Decomposed,
}

impl SpecName {
    pub const ALL: [SpecName; 3] = [SpecName::Simple, SpecName::Lagged, SpecName::Decomposed];

    pub fn as_str(&self) -> &'static str {
        match self {
            SpecName::Simple => "simple",
            SpecName::Lagged => "lagged",
            SpecName::Decomposed => "decomposed",
        }
    }

    /// Coefficient names, intercept first.
    pub fn coefficient_names(&self) -> &'static [&'static str] {
        match self {
            SpecName::Simple => &["b", "c"],
            SpecName::Lagged => &["b", "c0", "c1"],
            SpecName::Decomposed => &["b", "coef_expected", "coef_unexpected"],
        }
    }
}

impl fmt::Display for SpecName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpecName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "simple" => Ok(SpecName::Simple),
            "lagged" => Ok(SpecName::Lagged),
            "decomposed" => Ok(SpecName::Decomposed),
            other => Err(format!("unknown regression spec `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub name: &'static str,
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult {
    pub spec: SpecName,
    pub q: usize,
    pub coefficients: Vec<Coefficient>,
    pub adj_r2: f64,
    pub n_obs: usize,
}

impl RegressionResult {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.coefficient(name).map(|c| c.estimate)
    }

    /// Adjusted R^2 in percent, as tables report it.
    pub fn adj_r2_pct(&self) -> f64 {
        100.0 * self.adj_r2
    }
}

/// Daily variance ratios for one aggregation level.
#[derive(Debug, Clone, PartialEq)]
pub struct VrSeries {
    pub q: usize,
    pub series: DatedSeries,
}

impl VrSeries {
    pub fn new(q: usize, series: DatedSeries) -> Self {
        Self { q, series }
    }
}

/// Response and regressors for one specification, aligned by date.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionDesign {
    pub spec: SpecName,
    pub q: usize,
    pub dates: Vec<NaiveDate>,
    pub response: Vec<f64>,
    /// Non-intercept regressors, in the order of `spec.coefficient_names()[1..]`.
    pub regressors: Vec<Vec<f64>>,
}

impl RegressionDesign {
    pub fn len(&self) -> usize {
        self.response.len()
    }

    pub fn is_empty(&self) -> bool {
        self.response.is_empty()
    }

    /// Keeps only the rows dated in `dates`; every date must be present.
    pub fn restrict(&self, dates: &[NaiveDate]) -> Result<Self> {
        let idx = dates
            .iter()
            .map(|d| {
                self.dates
                    .binary_search(d)
                    .map_err(|_| Error::Alignment(format!("{} design has no row for {d}", self.spec)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec: self.spec,
            q: self.q,
            dates: dates.to_vec(),
            response: idx.iter().map(|&i| self.response[i]).collect(),
            regressors: self
                .regressors
                .iter()
                .map(|col| idx.iter().map(|&i| col[i]).collect())
                .collect(),
        })
    }

    /// Fits rows `[start, end)`.
    pub fn fit_rows(&self, start: usize, end: usize, se_mode: SeMode) -> Result<RegressionResult> {
        let cols: Vec<&[f64]> = self.regressors.iter().map(|c| &c[start..end]).collect();
        let x = design_with_intercept(&cols);
        let fit = ols_with(&self.response[start..end], &x, se_mode)?;
        Ok(RegressionResult {
            spec: self.spec,
            q: self.q,
            coefficients: self
                .spec
                .coefficient_names()
                .iter()
                .zip(fit.coefficients.iter().zip(&fit.std_errors))
                .map(|(&name, (&estimate, &std_error))| Coefficient { name, estimate, std_error })
                .collect(),
            adj_r2: fit.adj_r2,
            n_obs: fit.n_obs,
        })
    }

    pub fn fit(&self, se_mode: SeMode) -> Result<RegressionResult> {
        if self.len() < MIN_REGRESSION_OBS {
            return Err(Error::TooFewRows { rows: self.len(), cols: self.regressors.len() + 1 });
        }
        self.fit_rows(0, self.len(), se_mode)
    }
}

fn check_same_dates(a: &DatedSeries, b: &DatedSeries, what: &str) -> Result<()> {
    if a.dates() != b.dates() {
        return Err(Error::Alignment(format!("variance ratio and {what} cover different dates")));
    }
    Ok(())
}

pub fn design_simple(vr: &VrSeries, log_rv: &DatedSeries) -> Result<RegressionDesign> {
    check_same_dates(&vr.series, log_rv, "log RV")?;
    Ok(RegressionDesign {
        spec: SpecName::Simple,
        q: vr.q,
        dates: vr.series.dates().to_vec(),
        response: vr.series.values().to_vec(),
        regressors: vec![log_rv.values().to_vec()],
    })
}

/// The first day is dropped since it has no lag.
pub fn design_lagged(vr: &VrSeries, log_rv: &DatedSeries) -> Result<RegressionDesign> {
    check_same_dates(&vr.series, log_rv, "log RV")?;
    let n = vr.series.len();
    if n < 2 {
        return Err(Error::TooFewRows { rows: n.saturating_sub(1), cols: 3 });
    }
    let lr = log_rv.values();
    Ok(RegressionDesign {
        spec: SpecName::Lagged,
        q: vr.q,
        dates: vr.series.dates()[1..].to_vec(),
        response: vr.series.values()[1..].to_vec(),
        regressors: vec![lr[1..].to_vec(), lr[..n - 1].to_vec()],
    })
}

/// Every variance-ratio date must be an in-sample HAR date.
pub fn design_decomposed(vr: &VrSeries, har: &HarFit) -> Result<RegressionDesign> {
    let sigma_p = har.sigma_p().select(vr.series.dates())?;
    let sigma_u = har.sigma_u().select(vr.series.dates())?;
    Ok(RegressionDesign {
        spec: SpecName::Decomposed,
        q: vr.q,
        dates: vr.series.dates().to_vec(),
        response: vr.series.values().to_vec(),
        regressors: vec![sigma_p.values().to_vec(), sigma_u.values().to_vec()],
    })
}

pub fn regression_simple(vr: &VrSeries, log_rv: &DatedSeries, se_mode: SeMode) -> Result<RegressionResult> {
    design_simple(vr, log_rv)?.fit(se_mode)
}

pub fn regression_lagged(vr: &VrSeries, log_rv: &DatedSeries, se_mode: SeMode) -> Result<RegressionResult> {
    design_lagged(vr, log_rv)?.fit(se_mode)
}

pub fn regression_decomposed(vr: &VrSeries, har: &HarFit, se_mode: SeMode) -> Result<RegressionResult> {
    design_decomposed(vr, har)?.fit(se_mode)
}

/// The three designs on a common sample: the in-sample HAR dates, which
/// already exclude the 22-day burn-in and hence the lag drop.
pub fn aligned_designs(vr: &VrSeries, log_rv: &DatedSeries, har: &HarFit) -> Result<[RegressionDesign; 3]> {
    let vr_har = VrSeries::new(vr.q, vr.series.select(&har.dates)?);
    Ok([
        design_simple(vr, log_rv)?.restrict(&har.dates)?,
        design_lagged(vr, log_rv)?.restrict(&har.dates)?,
        design_decomposed(&vr_har, har)?,
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct RollingWindow {
    pub end_date: NaiveDate,
    pub result: RegressionResult,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RollingSeries {
    pub spec: SpecName,
    pub q: usize,
    pub window_length: usize,
    pub level: f64,
    pub windows: Vec<RollingWindow>,
}

/// Two-sided Normal quantile for a confidence `level`.
pub fn normal_quantile(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidLevel(level));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(0.5 + level / 2.0))
}

fn with_bands(end_date: NaiveDate, result: RegressionResult, z: f64) -> RollingWindow {
    let (ci_low, ci_high) = result
        .coefficients
        .iter()
        .map(|c| (c.estimate - z * c.std_error, c.estimate + z * c.std_error))
        .unzip();
    RollingWindow { end_date, result, ci_low, ci_high }
}

fn check_window(len: usize, window: usize, regressors: usize) -> Result<()> {
    if window <= regressors + 2 {
        return Err(Error::TooFewRows { rows: window, cols: regressors + 1 });
    }
    if len < window {
        return Err(Error::SeriesTooShort { len, window });
    }
    Ok(())
}

/// Fits every window of `window` consecutive rows, stepping one row.
pub fn rolling_regression(
    design: &RegressionDesign,
    window: usize,
    level: f64,
    se_mode: SeMode,
) -> Result<RollingSeries> {
    check_window(design.len(), window, design.regressors.len())?;
    let z = normal_quantile(level)?;
    let windows = (0..=design.len() - window)
        .into_par_iter()
        .map(|start| {
            let end = start + window;
            let result = design.fit_rows(start, end, se_mode)?;
            Ok(with_bands(design.dates[end - 1], result, z))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RollingSeries { spec: design.spec, q: design.q, window_length: window, level, windows })
}

/// Rolling decomposed regression with the HAR model refit inside every
/// window of `window` consecutive trading days. Each window loses the
/// 22-day HAR burn-in, so it regresses on `window - 22` rows.
pub fn rolling_decomposed_refit(
    vr: &VrSeries,
    series: &RvSeries,
    window: usize,
    level: f64,
    se_mode: SeMode,
) -> Result<RollingSeries> {
    if vr.series.dates() != series.dates().as_slice() {
        return Err(Error::Alignment("variance ratio and RV series cover different dates".into()));
    }
    check_window(series.len(), window, 2)?;
    let z = normal_quantile(level)?;
    let windows = (0..=series.len() - window)
        .into_par_iter()
        .map(|start| {
            let end = start + window;
            let har = fit_har(&series.slice(start, end))?;
            let vr_win = VrSeries::new(vr.q, vr.series.slice(start + (window - har.n_obs), end));
            let result = design_decomposed(&vr_win, &har)?.fit_rows(0, har.n_obs, se_mode)?;
            Ok(with_bands(vr.series.dates()[end - 1], result, z))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RollingSeries { spec: SpecName::Decomposed, q: vr.q, window_length: window, level, windows })
}
