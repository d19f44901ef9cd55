//! Daily overlapped variance ratio with a power transformation.
//!
//! For one day's returns `r_1..r_n` and aggregation level `q`:
//!
//! ```text
//! mu      = (1/n) sum r_k
//! sigma_a = (1/(n-1)) sum (r_k - mu)^2
//! sigma_c = (1/m) sum_{k=q..n} (r_{k-q+1} + ... + r_k - q mu)^2
//! m       = q (n - q + 1) (1 - q/n)
//! VR(q)   = (sigma_c / sigma_a)^beta
//! ```
//!
//! The exponent `beta` depends only on `(n, q)`:
//!
//! ```text
//! beta = 1 - (2/3) S1 S3 / S2^2,   S_p = sum_{j=1..floor((n-1)/2)} W_q(2 pi j / n)^p
//! W_k(l) = (1/k) sin^2(k l / 2) / sin^2(l / 2)
//! ```
//!
//! Under serially uncorrelated returns `VR(q)` is close to 1. Positive
//! autocorrelation makes the q-period variance larger than `q` times the
//! one-period variance, so `VR(q) > 1`; negative autocorrelation gives
//! `VR(q) < 1`, down to exactly 0 for a perfectly alternating day.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Aggregation levels used by the daily pipeline.
pub const PIPELINE_Q: [usize; 5] = [2, 3, 4, 5, 6];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VrStat {
    pub q: usize,
    pub vr: f64,
    pub beta: f64,
    pub sigma_a2: f64,
    pub sigma_c2: f64,
    pub m: f64,
    /// Diagnostic only: `beta * sqrt(2 (2q-1)(q-1) / (3 q n))`.
    pub asymptotic_sd: f64,
}

pub fn sample_mean(returns: &[f64]) -> Result<f64> {
    crate::numeric::mean(returns).ok_or(Error::EmptyInput)
}

/// One-period variance with the `1/(n-1)` normalization.
pub fn variance_a(returns: &[f64]) -> Result<f64> {
    crate::numeric::variance(returns, 1).ok_or(Error::TooShort { needed: 2, got: returns.len() })
}

/// The overlapped normalizer `q (n - q + 1) (1 - q/n)`.
pub fn overlap_normalizer(n: usize, q: usize) -> f64 {
    q as f64 * (n - q + 1) as f64 * (1.0 - q as f64 / n as f64)
}

fn check_len(n: usize, q: usize) -> Result<()> {
    if q == 0 {
        return Err(Error::InvalidAggregation(q));
    }
    if n < 2 * q {
        return Err(Error::TooShort { needed: 2 * q, got: n });
    }
    Ok(())
}

/// Overlapped q-period variance; returns `(sigma_c2, m)`.
pub fn variance_c(returns: &[f64], q: usize) -> Result<(f64, f64)> {
    let n = returns.len();
    check_len(n, q)?;
    let mu = sample_mean(returns)?;
    let q_mu = q as f64 * mu;
    // the q-sums are recomputed per window rather than via a running sum,
    // so cancellation does not accumulate across the day
    let ss = compensated_sum(returns.windows(q).map(|w| {
        let d = compensated_sum(w.iter().copied()) - q_mu;
        d * d
    }));
    let m = overlap_normalizer(n, q);
    Ok((ss / m, m))
}

/// `W_k(lambda) = (1/k) sin^2(k lambda / 2) / sin^2(lambda / 2)`.
pub fn dirichlet_kernel(k: usize, lambda: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidAggregation(k));
    }
    // distance to the nearest multiple of 2 pi; sin(pi) is ~1.2e-16, not 0
    let r = lambda.rem_euclid(2.0 * PI);
    if !lambda.is_finite() || r.min(2.0 * PI - r) <= 4.0 * f64::EPSILON * lambda.abs().max(1.0) {
        return Err(Error::SingularLambda(lambda));
    }
    let den = (lambda / 2.0).sin();
    if k == 1 {
        return Ok(1.0);
    }
    let num = (k as f64 * lambda / 2.0).sin();
    Ok(num * num / (den * den) / k as f64)
}

/// Power exponent making the small-sample VR distribution closer to Normal.
pub fn beta_exponent(n: usize, q: usize) -> Result<f64> {
    if q == 0 {
        return Err(Error::InvalidAggregation(q));
    }
    if n < 3 {
        return Err(Error::TooShort { needed: 3, got: n });
    }
    let terms = (n - 1) / 2;
    let w: Vec<f64> = (1..=terms)
        .map(|j| dirichlet_kernel(q, 2.0 * PI * j as f64 / n as f64))
        .collect::<Result<_>>()?;
    let s1 = compensated_sum(w.iter().copied());
    let s2 = compensated_sum(w.iter().map(|x| x * x));
    let s3 = compensated_sum(w.iter().map(|x| x * x * x));
    Ok(1.0 - (2.0 / 3.0) * (s1 * s3) / (s2 * s2))
}

fn beta_cache() -> &'static RwLock<HashMap<(usize, usize), f64>> {
    static CACHE: OnceLock<RwLock<HashMap<(usize, usize), f64>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// [`beta_exponent`] memoized per `(n, q)`.
pub fn cached_beta(n: usize, q: usize) -> Result<f64> {
    if let Some(b) = beta_cache().read().unwrap_or_else(|e| e.into_inner()).get(&(n, q)) {
        return Ok(*b);
    }
    let b = beta_exponent(n, q)?;
    beta_cache()
        .write()
        .unwrap_or_else(|e| e.into_inner())
        .insert((n, q), b);
    Ok(b)
}

pub fn asymptotic_sd(n: usize, q: usize, beta: f64) -> f64 {
    let (n, q) = (n as f64, q as f64);
    beta * (2.0 * (2.0 * q - 1.0) * (q - 1.0) / (3.0 * q * n)).sqrt()
}

pub fn variance_ratio(returns: &[f64], q: usize) -> Result<VrStat> {
    let n = returns.len();
    check_len(n, q)?;
    let sigma_a2 = variance_a(returns)?;
    if sigma_a2 <= 0.0 {
        return Err(Error::DegenerateDay);
    }
    let (sigma_c2, m) = variance_c(returns, q)?;
    let beta = cached_beta(n, q)?;
    Ok(VrStat {
        q,
        vr: (sigma_c2 / sigma_a2).powf(beta),
        beta,
        sigma_a2,
        sigma_c2,
        m,
        asymptotic_sd: asymptotic_sd(n, q, beta),
    })
}
