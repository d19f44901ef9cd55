//! HAR cascade on log realized variance.
//!
//! ```text
//! log RV_t = b0 + b_d log RV_{t-1} + b_w log RV^(w)_{t-1} + b_m log RV^(m)_{t-1} + eta_t
//! ```
//!
//! with `RV^(w)` and `RV^(m)` the 5- and 22-day means of lagged log RV. The
//! fitted values are the predictable volatility `sigma_p` and the residuals
//! the unexpected volatility `sigma_u`; by construction
//! `sigma_p + sigma_u = log RV` on every in-sample day.

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::ols::{design_with_intercept, ols};
use crate::realized::{heterogeneous_average, RvSeries, MONTHLY, WEEKLY};
use crate::series::DatedSeries;

/// Minimum number of regression rows accepted by [`fit_har`].
pub const MIN_HAR_OBS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarCoefficients {
    pub beta0: f64,
    pub beta_d: f64,
    pub beta_w: f64,
    pub beta_m: f64,
}

impl HarCoefficients {
    pub fn new(beta0: f64, beta_d: f64, beta_w: f64, beta_m: f64) -> Self {
        Self { beta0, beta_d, beta_w, beta_m }
    }

    pub fn persistence(&self) -> f64 {
        self.beta_d + self.beta_w + self.beta_m
    }

    /// Level at which the noiseless recursion is stationary.
    pub fn fixed_point(&self) -> f64 {
        self.beta0 / (1.0 - self.persistence())
    }

    pub fn predict(&self, daily: f64, weekly: f64, monthly: f64) -> f64 {
        self.beta0 + self.beta_d * daily + self.beta_w * weekly + self.beta_m * monthly
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.beta0, self.beta_d, self.beta_w, self.beta_m]
    }

    fn from_slice(v: &[f64]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }
}

/// HAR regressors, one row per day with a full 22-day history.
#[derive(Debug, Clone, PartialEq)]
pub struct HarDesign {
    pub dates: Vec<NaiveDate>,
    pub response: Vec<f64>,
    pub daily: Vec<f64>,
    pub weekly: Vec<f64>,
    pub monthly: Vec<f64>,
}

impl HarDesign {
    pub fn len(&self) -> usize {
        self.response.len()
    }

    pub fn is_empty(&self) -> bool {
        self.response.is_empty()
    }

    /// Design row `[1, daily, weekly, monthly]`.
    pub fn row(&self, i: usize) -> [f64; 4] {
        [1.0, self.daily[i], self.weekly[i], self.monthly[i]]
    }
}

pub fn build_har_design(series: &RvSeries) -> Result<HarDesign> {
    if series.len() <= MONTHLY {
        return Err(Error::InsufficientHistory { needed: MONTHLY + 1, available: series.len() });
    }
    let rows = series.len() - MONTHLY;
    let mut design = HarDesign {
        dates: Vec::with_capacity(rows),
        response: Vec::with_capacity(rows),
        daily: Vec::with_capacity(rows),
        weekly: Vec::with_capacity(rows),
        monthly: Vec::with_capacity(rows),
    };
    let entries = series.entries();
    for (t, entry) in entries.iter().enumerate().skip(MONTHLY) {
        design.dates.push(entry.date);
        design.response.push(entry.log_rv);
        design.daily.push(heterogeneous_average(series, t, 1)?);
        design.weekly.push(heterogeneous_average(series, t, WEEKLY)?);
        design.monthly.push(heterogeneous_average(series, t, MONTHLY)?);
    }
    Ok(design)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarFit {
    pub coefficients: HarCoefficients,
    pub std_errors: HarCoefficients,
    pub adj_r2: f64,
    pub dates: Vec<NaiveDate>,
    pub log_rv: Vec<f64>,
    /// Predictable volatility.
    pub fitted: Vec<f64>,
    /// Unexpected volatility.
    pub residuals: Vec<f64>,
    pub n_obs: usize,
}

impl HarFit {
    pub fn sigma_p(&self) -> DatedSeries {
        DatedSeries::new(self.dates.clone(), self.fitted.clone()).expect("fit dates are ordered")
    }

    pub fn sigma_u(&self) -> DatedSeries {
        DatedSeries::new(self.dates.clone(), self.residuals.clone()).expect("fit dates are ordered")
    }
}

/// Fits the HAR model by least squares. A constant series makes the lag
/// columns collinear with the intercept and yields `RankDeficient`.
pub fn fit_har(series: &RvSeries) -> Result<HarFit> {
    let design = build_har_design(series)?;
    if design.len() < MIN_HAR_OBS {
        return Err(Error::TooFewRows { rows: design.len(), cols: 4 });
    }
    let x = design_with_intercept(&[&design.daily, &design.weekly, &design.monthly]);
    let fit = ols(&design.response, &x)?;
    Ok(HarFit {
        coefficients: HarCoefficients::from_slice(&fit.coefficients),
        std_errors: HarCoefficients::from_slice(&fit.std_errors),
        adj_r2: fit.adj_r2,
        n_obs: design.len(),
        dates: design.dates,
        log_rv: design.response,
        fitted: fit.fitted,
        residuals: fit.residuals,
    })
}
