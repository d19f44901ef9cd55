//! Ordinary least squares via Householder QR.
//!
//! The normal equations are never formed: coefficients come from
//! `R b = Q^T y` and `(X^T X)^{-1} = R^{-1} R^{-T}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Relative size of `|R_jj|` against the norm of column `j` below which the
/// column is treated as collinear with earlier columns.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeMode {
    /// Homoskedastic `s^2 (X^T X)^{-1}`.
    #[default]
    Ols,
    /// White (HC0) heteroskedasticity-consistent sandwich.
    White,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub r2: f64,
    /// `1 - (1 - R^2)(n - 1)/(n - p - 1)`, `p` = regressors excluding the intercept.
    pub adj_r2: f64,
    pub residuals: Vec<f64>,
    pub fitted: Vec<f64>,
    pub sigma2: f64,
    pub n_obs: usize,
}

/// Builds `[1, columns...]`, one row per observation.
pub fn design_with_intercept(columns: &[&[f64]]) -> DMatrix<f64> {
    let n = columns.first().map_or(0, |c| c.len());
    DMatrix::from_fn(n, columns.len() + 1, |i, j| if j == 0 { 1.0 } else { columns[j - 1][i] })
}

pub fn ols(y: &[f64], x: &DMatrix<f64>) -> Result<OlsFit> {
    ols_with(y, x, SeMode::Ols)
}

/// Least squares of `y` on `x`. The first column of `x` is expected to be
/// the intercept; R^2 is computed against the mean of `y`.
pub fn ols_with(y: &[f64], x: &DMatrix<f64>, se_mode: SeMode) -> Result<OlsFit> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::Alignment(format!("{} responses for {n} design rows", y.len())));
    }
    if n <= p || p == 0 {
        return Err(Error::TooFewRows { rows: n, cols: p });
    }

    let qr = x.clone().qr();
    let r = qr.r();
    for j in 0..p {
        let col_norm = x.column(j).norm();
        if col_norm == 0.0 || r[(j, j)].abs() <= RANK_TOLERANCE * col_norm {
            return Err(Error::RankDeficient { column: j });
        }
    }
    let q = qr.q();
    let yv = DVector::from_column_slice(y);
    let qty = q.transpose() * &yv;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::RankDeficient { column: p - 1 })?;

    let fitted = x * &beta;
    let residuals: Vec<f64> = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let ssr = compensated_sum(residuals.iter().map(|e| e * e));
    let y_mean = compensated_sum(y.iter().copied()) / n as f64;
    let sst = compensated_sum(y.iter().map(|v| (v - y_mean) * (v - y_mean)));
    // a constant response has nothing to explain
    let r2 = if sst > 0.0 { 1.0 - ssr / sst } else { 0.0 };
    let adj_r2 = 1.0 - (1.0 - r2) * (n - 1) as f64 / (n - p) as f64;
    let sigma2 = ssr / (n - p) as f64;

    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or(Error::RankDeficient { column: p - 1 })?;
    let cov = match se_mode {
        SeMode::Ols => (&r_inv * r_inv.transpose()) * sigma2,
        SeMode::White => {
            let mut meat = DMatrix::<f64>::zeros(p, p);
            for (i, e) in residuals.iter().enumerate() {
                let row = q.row(i);
                meat += row.transpose() * row * (e * e);
            }
            &r_inv * meat * r_inv.transpose()
        }
    };
    let std_errors = (0..p).map(|j| cov[(j, j)].max(0.0).sqrt()).collect();

    Ok(OlsFit {
        coefficients: beta.iter().copied().collect(),
        std_errors,
        r2,
        adj_r2,
        residuals,
        fitted: fitted.iter().copied().collect(),
        sigma2,
        n_obs: n,
    })
}
