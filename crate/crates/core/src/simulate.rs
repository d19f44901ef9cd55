//! Seeded synthetic markets.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), seeded with
//! `ChaCha8Rng::seed_from_u64(seed)`. Day `i` draws its intraday returns
//! from ChaCha stream `i`, so days can be generated in any order or in
//! parallel with bit-identical results. The HAR cascade's daily
//! log-variance path uses the reserved stream [`VOLATILITY_STREAM`].
//!
//! Uniforms are `((u64 >> 11) + 0.5) / 2^53`, strictly inside (0, 1), and
//! Normals are their image under the inverse standard Normal CDF.

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::grid::DayGrid;
use crate::har::HarCoefficients;
use crate::realized::{MONTHLY, WEEKLY};

pub const VOLATILITY_STREAM: u64 = u64::MAX;
pub const HAR_BURN_IN: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimModel {
    IidGaussian { sigma: f64 },
    Ar1 { phi: f64, sigma: f64 },
    HarCascade { coefficients: HarCoefficients, noise_sd: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSpec {
    pub model: SimModel,
    pub days: usize,
    pub returns_per_day: usize,
    pub seed: u64,
}

impl SimSpec {
    pub fn new(model: SimModel, days: usize, seed: u64) -> Self {
        Self { model, days, returns_per_day: 84, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        if self.days == 0 {
            return bad("days must be positive");
        }
        if self.returns_per_day < 2 {
            return bad("returns_per_day must be at least 2");
        }
        match self.model {
            SimModel::IidGaussian { sigma } | SimModel::Ar1 { sigma, .. }
                if !(sigma.is_finite() && sigma >= 0.0) =>
            {
                bad("sigma must be finite and non-negative")
            }
            SimModel::Ar1 { phi, .. } if phi.is_nan() || phi.abs() >= 1.0 => bad("ar1 requires |phi| < 1"),
            SimModel::HarCascade { coefficients, noise_sd } => {
                if !coefficients.as_array().iter().all(|c| c.is_finite()) {
                    bad("HAR coefficients must be finite")
                } else if coefficients.persistence() >= 1.0 {
                    bad("HAR cascade requires beta_d + beta_w + beta_m < 1")
                } else if !(noise_sd.is_finite() && noise_sd > 0.0) {
                    bad("noise_sd must be positive")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Synthetic gridded days, plus the latent daily log-variance for the HAR cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct SimPanel {
    pub days: Vec<DayGrid>,
    pub log_variance: Option<Vec<f64>>,
}

/// Standard Normal draws from one ChaCha stream.
pub struct NormalStream {
    rng: ChaCha8Rng,
    normal: Normal,
}

impl NormalStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, normal: Normal::standard() }
    }

    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        let u = self.uniform();
        self.normal.inverse_cdf(u)
    }
}

/// `n` weekdays starting at 2000-01-03.
pub fn trading_dates(n: usize) -> Vec<NaiveDate> {
    let mut d = NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date");
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

fn panel(spec: &SimSpec, day_returns: impl Fn(usize, &mut NormalStream) -> Vec<f64> + Sync) -> Vec<DayGrid> {
    let dates = trading_dates(spec.days);
    dates
        .into_par_iter()
        .enumerate()
        .map(|(i, date)| {
            let mut stream = NormalStream::new(spec.seed, i as u64);
            DayGrid::from_returns(date, day_returns(i, &mut stream))
        })
        .collect()
}

pub fn gen_iid(spec: &SimSpec) -> Result<SimPanel> {
    spec.validate()?;
    let SimModel::IidGaussian { sigma } = spec.model else {
        return Err(Error::InvalidSpec("gen_iid needs an iid_gaussian model".into()));
    };
    let n = spec.returns_per_day;
    let days = panel(spec, |_, s| (0..n).map(|_| sigma * s.next_normal()).collect());
    Ok(SimPanel { days, log_variance: None })
}

/// Within-day AR(1) started from its stationary distribution; days are independent.
pub fn gen_ar1(spec: &SimSpec) -> Result<SimPanel> {
    spec.validate()?;
    let SimModel::Ar1 { phi, sigma } = spec.model else {
        return Err(Error::InvalidSpec("gen_ar1 needs an ar1 model".into()));
    };
    let n = spec.returns_per_day;
    let stationary_sd = sigma / (1.0 - phi * phi).sqrt();
    let days = panel(spec, |_, s| {
        let mut out = Vec::with_capacity(n);
        let mut x = stationary_sd * s.next_normal();
        out.push(x);
        for _ in 1..n {
            x = phi * x + sigma * s.next_normal();
            out.push(x);
        }
        out
    });
    Ok(SimPanel { days, log_variance: None })
}

/// Extends `path` (at least 22 values, oldest first) by one HAR step per
/// innovation.
pub fn extend_har_path(coefficients: &HarCoefficients, path: &mut Vec<f64>, innovations: &[f64]) {
    assert!(path.len() >= MONTHLY, "HAR recursion needs {MONTHLY} values of history");
    for eta in innovations {
        let t = path.len();
        let weekly = path[t - WEEKLY..].iter().sum::<f64>() / WEEKLY as f64;
        let monthly = path[t - MONTHLY..].iter().sum::<f64>() / MONTHLY as f64;
        path.push(coefficients.predict(path[t - 1], weekly, monthly) + eta);
    }
}

/// Daily log-variance from the HAR recursion with Gaussian innovations,
/// started at the fixed point and run through a 500-day burn-in. Intraday
/// returns are i.i.d. Normal with variance `exp(h_t) / n`, so each day's
/// realized variance has expectation `exp(h_t)`.
pub fn gen_har_cascade(spec: &SimSpec) -> Result<SimPanel> {
    spec.validate()?;
    let SimModel::HarCascade { coefficients, noise_sd } = spec.model else {
        return Err(Error::InvalidSpec("gen_har_cascade needs a har_cascade model".into()));
    };
    let mut vol = NormalStream::new(spec.seed, VOLATILITY_STREAM);
    let total = HAR_BURN_IN + spec.days;
    let innovations: Vec<f64> = (0..total).map(|_| noise_sd * vol.next_normal()).collect();
    let mut path = vec![coefficients.fixed_point(); MONTHLY];
    extend_har_path(&coefficients, &mut path, &innovations);
    let log_variance = path.split_off(MONTHLY + HAR_BURN_IN);

    let n = spec.returns_per_day;
    let days = panel(spec, |i, s| {
        let sd = (log_variance[i].exp() / n as f64).sqrt();
        (0..n).map(|_| sd * s.next_normal()).collect()
    });
    Ok(SimPanel { days, log_variance: Some(log_variance) })
}

pub fn generate(spec: &SimSpec) -> Result<SimPanel> {
    match spec.model {
        SimModel::IidGaussian { .. } => gen_iid(spec),
        SimModel::Ar1 { .. } => gen_ar1(spec),
        SimModel::HarCascade { .. } => gen_har_cascade(spec),
    }
}
