//! Monte Carlo and brute-force oracles for the estimation modules.

use chrono::NaiveDate;
use proptest::prelude::*;

use vrvol_core::har::{build_har_design, fit_har, HarCoefficients};
use vrvol_core::numeric::variance;
use vrvol_core::ols::{design_with_intercept, ols, SeMode};
use vrvol_core::realized::RvSeries;
use vrvol_core::regress::{
    design_simple, regression_decomposed, regression_lagged, regression_simple, rolling_regression, SpecName,
    VrSeries,
};
use vrvol_core::series::DatedSeries;
use vrvol_core::simulate::{extend_har_path, gen_ar1, gen_har_cascade, gen_iid, trading_dates, NormalStream, SimModel, SimSpec};
use vrvol_core::vr::variance_ratio;

fn normals(seed: u64, stream: u64, n: usize) -> Vec<f64> {
    let mut s = NormalStream::new(seed, stream);
    (0..n).map(|_| s.next_normal()).collect()
}

fn dated(values: Vec<f64>) -> DatedSeries {
    DatedSeries::new(trading_dates(values.len()), values).unwrap()
}

/// Solves the normal equations by Gauss-Jordan elimination with partial
/// pivoting; returns (coefficients, diag of (X'X)^-1).
fn normal_equations(y: &[f64], cols: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let p = cols.len();
    let mut a = vec![vec![0.0; 2 * p + 1]; p];
    for i in 0..p {
        for j in 0..p {
            a[i][j] = cols[i].iter().zip(&cols[j]).map(|(x, z)| x * z).sum();
        }
        a[i][p + i] = 1.0;
        a[i][2 * p] = cols[i].iter().zip(y).map(|(x, z)| x * z).sum();
    }
    for c in 0..p {
        let piv = (c..p).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        let d = a[c][c];
        for v in a[c].iter_mut() {
            *v /= d;
        }
        for r in 0..p {
            if r != c {
                let f = a[r][c];
                let row_c = a[c].clone();
                for (v, w) in a[r].iter_mut().zip(row_c) {
                    *v -= f * w;
                }
            }
        }
    }
    ((0..p).map(|i| a[i][2 * p]).collect(), (0..p).map(|i| a[i][p + i]).collect())
}

#[test]
fn ols_matches_normal_equations() {
    let n = 200;
    let cols: Vec<Vec<f64>> = std::iter::once(vec![1.0; n])
        .chain((0..3).map(|k| normals(11, k, n)))
        .collect();
    let noise = normals(11, 99, n);
    let y: Vec<f64> = (0..n)
        .map(|i| 0.3 + 1.5 * cols[1][i] - 0.7 * cols[2][i] + 0.1 * cols[3][i] + noise[i])
        .collect();
    let fit = ols(&y, &design_with_intercept(&[&cols[1], &cols[2], &cols[3]])).unwrap();
    let (beta, diag) = normal_equations(&y, &cols);
    let ssr: f64 = (0..n)
        .map(|i| {
            let yhat: f64 = (0..4).map(|j| beta[j] * cols[j][i]).sum();
            (y[i] - yhat).powi(2)
        })
        .sum();
    for j in 0..4 {
        assert!((fit.coefficients[j] - beta[j]).abs() <= 1e-10 * beta[j].abs());
        let se = (ssr / (n - 4) as f64 * diag[j]).sqrt();
        assert!((fit.std_errors[j] - se).abs() <= 1e-8 * se);
    }
}

#[test]
fn ols_on_pure_noise() {
    let n = 10_000;
    let x = normals(5, 0, n);
    let y = normals(5, 1, n);
    let fit = ols(&y, &design_with_intercept(&[&x])).unwrap();
    assert!(fit.coefficients[1].abs() < 3.0 * fit.std_errors[1]);
    assert!(fit.adj_r2.abs() < 1e-3);
}

proptest! {
    #[test]
    fn ols_slopes_invariant_to_regressor_shift(seed in 0u64..1000, shift in -50.0f64..50.0, which in 0usize..2) {
        let n = 60;
        let a = normals(seed, 0, n);
        let b = normals(seed, 1, n);
        let y = normals(seed, 2, n);
        let base = ols(&y, &design_with_intercept(&[&a, &b])).unwrap();
        let (a2, b2): (Vec<f64>, Vec<f64>) = if which == 0 {
            (a.iter().map(|v| v + shift).collect(), b.clone())
        } else {
            (a.clone(), b.iter().map(|v| v + shift).collect())
        };
        let moved = ols(&y, &design_with_intercept(&[&a2, &b2])).unwrap();
        for j in 1..3 {
            prop_assert!((moved.coefficients[j] - base.coefficients[j]).abs() <= 1e-9 * base.coefficients[j].abs().max(1e-3));
        }
    }
}

#[test]
fn simple_regression_recovers_slope() {
    let n = 3000;
    let lr: Vec<f64> = normals(8, 0, n).iter().map(|z| -9.0 + 0.5 * z).collect();
    let noise = normals(8, 1, n);
    let vr: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * lr[i] + 0.05 * noise[i]).collect();
    let res = regression_simple(&VrSeries::new(2, dated(vr)), &dated(lr), SeMode::Ols).unwrap();
    let c = res.coefficient("c").unwrap();
    assert!((c.estimate - 0.5).abs() < 3.0 * c.std_error);
}

#[test]
fn lagged_regression_null() {
    let n = 3000;
    let lr: Vec<f64> = normals(9, 0, n).iter().map(|z| -9.0 + 0.5 * z).collect();
    let vr: Vec<f64> = normals(9, 1, n).iter().map(|z| 1.0 + 0.03 * z).collect();
    let res = regression_lagged(&VrSeries::new(2, dated(vr)), &dated(lr), SeMode::Ols).unwrap();
    for name in ["c0", "c1"] {
        let c = res.coefficient(name).unwrap();
        assert!(c.estimate.abs() < 3.0 * c.std_error, "{name}");
    }
}

fn latent_har(days: usize, seed: u64) -> (Vec<NaiveDate>, Vec<f64>) {
    let spec = SimSpec::new(
        SimModel::HarCascade { coefficients: HarCoefficients::new(0.1, 0.4, 0.3, 0.2), noise_sd: 0.3 },
        days,
        seed,
    );
    let panel = gen_har_cascade(&spec).unwrap();
    (trading_dates(days), panel.log_variance.unwrap())
}

#[test]
fn decomposed_regression_recovers_joint_coefficients() {
    let (dates, lv) = latent_har(5000, 31);
    let har = fit_har(&RvSeries::from_log_rv(&dates, &lv).unwrap()).unwrap();
    let noise = normals(31, 500, har.n_obs);
    let vr: Vec<f64> = (0..har.n_obs)
        .map(|i| 1.0 - 0.5 * har.fitted[i] + 0.8 * har.residuals[i] + 0.05 * noise[i])
        .collect();
    let vr = VrSeries::new(2, DatedSeries::new(har.dates.clone(), vr).unwrap());
    let res = regression_decomposed(&vr, &har, SeMode::Ols).unwrap();
    for (name, truth) in [("coef_expected", -0.5), ("coef_unexpected", 0.8)] {
        let c = res.coefficient(name).unwrap();
        assert!((c.estimate - truth).abs() < 3.0 * c.std_error, "{name}");
    }
}

#[test]
fn rolling_bands_cover_constant_truth() {
    let n = 1500;
    let lr: Vec<f64> = normals(13, 0, n).iter().map(|z| -9.0 + 0.5 * z).collect();
    let noise = normals(13, 1, n);
    let vr: Vec<f64> = (0..n).map(|i| 1.0 - 0.2 * lr[i] + 0.05 * noise[i]).collect();
    let design = design_simple(&VrSeries::new(2, dated(vr)), &dated(lr)).unwrap();
    let roll = rolling_regression(&design, 250, 0.95, SeMode::Ols).unwrap();
    assert_eq!(roll.windows.len(), n - 250 + 1);
    let covered = roll
        .windows
        .iter()
        .filter(|w| w.ci_low[1] < -0.2 && -0.2 < w.ci_high[1])
        .count();
    assert!(covered as f64 >= 0.85 * roll.windows.len() as f64, "coverage {covered}");

    let full = design.fit(SeMode::Ols).unwrap();
    let c = full.coefficient("c").unwrap();
    let path_mean = roll.windows.iter().map(|w| w.result.coefficients[1].estimate).sum::<f64>() / roll.windows.len() as f64;
    assert!((path_mean - c.estimate).abs() < 3.0 * c.std_error);

    let big = rolling_regression(&design, 1250, 0.95, SeMode::Ols).unwrap();
    assert_eq!(big.windows.len(), 251);
    assert_eq!(big.spec, SpecName::Simple);
}

#[test]
fn noiseless_har_recovery() {
    let c = HarCoefficients::new(0.1, 0.4, 0.3, 0.2);
    let mut path = normals(21, 0, 22);
    extend_har_path(&c, &mut path, &[0.0; 150]);
    let fit = fit_har(&RvSeries::from_log_rv(&trading_dates(path.len()), &path).unwrap()).unwrap();
    for (got, want) in fit.coefficients.as_array().iter().zip(c.as_array()) {
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    }
}

#[test]
fn har_fit_properties() {
    let (dates, lv) = latent_har(10_000, 4);
    let series = RvSeries::from_log_rv(&dates, &lv).unwrap();
    let fit = fit_har(&series).unwrap();
    assert_eq!(fit.n_obs, 10_000 - 22);

    let truth = [0.1, 0.4, 0.3, 0.2];
    for ((est, se), t) in fit.coefficients.as_array().iter().zip(fit.std_errors.as_array()).zip(truth) {
        assert!((est - t).abs() < 3.0 * se, "{est} vs {t} (se {se})");
    }

    let design = build_har_design(&series).unwrap();
    let res_norm = fit.residuals.iter().map(|e| e * e).sum::<f64>().sqrt();
    for col in [vec![1.0; fit.n_obs], design.daily.clone(), design.weekly.clone(), design.monthly.clone()] {
        let dot: f64 = col.iter().zip(&fit.residuals).map(|(a, b)| a * b).sum();
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(dot.abs() <= 1e-8 * norm * res_norm);
    }

    let mean_u = fit.residuals.iter().sum::<f64>() / fit.n_obs as f64;
    let sd_u = variance(&fit.residuals, 1).unwrap().sqrt();
    assert!(mean_u.abs() <= 1e-10 * sd_u);

    let var_y = variance(&fit.log_rv, 1).unwrap();
    let var_p = variance(&fit.fitted, 1).unwrap();
    let var_u = variance(&fit.residuals, 1).unwrap();
    assert!((var_u - (var_y - var_p)).abs() <= 1e-8 * var_y);
    assert!(var_p < var_y);

    // regress the fitted values on the same design: identical coefficients
    let x = design_with_intercept(&[&design.daily, &design.weekly, &design.monthly]);
    let refit = ols(&fit.fitted, &x).unwrap();
    for (a, b) in refit.coefficients.iter().zip(fit.coefficients.as_array()) {
        assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
    }
}

/// Lag-1 autocorrelation with the known zero mean. Flipping the sign of
/// every other return negates it, so its expectation is exactly 0 under
/// i.i.d. symmetric returns.
fn lag1_zero_mean(r: &[f64]) -> (f64, f64) {
    let num: f64 = r.windows(2).map(|w| w[0] * w[1]).sum();
    let den: f64 = r.iter().map(|v| v * v).sum();
    (num, den)
}

#[test]
fn iid_lag1_autocorrelation_averages_to_zero() {
    let days = 100_000;
    let panel = gen_iid(&SimSpec::new(SimModel::IidGaussian { sigma: 1e-3 }, days, 17)).unwrap();
    let mean_rho = panel
        .days
        .iter()
        .map(|d| {
            let (n, s) = lag1_zero_mean(&d.returns);
            n / s
        })
        .sum::<f64>()
        / days as f64;
    let tol = 3.0 / ((days * 84) as f64).sqrt() * 3.0;
    assert!(mean_rho.abs() < tol, "{mean_rho} vs {tol}");
}

#[test]
fn ar1_moments_and_extreme_negative_case() {
    let panel = gen_ar1(&SimSpec::new(SimModel::Ar1 { phi: 0.3, sigma: 1e-3 }, 100_000, 23)).unwrap();
    let (num, den) = panel
        .days
        .iter()
        .map(|d| lag1_zero_mean(&d.returns))
        .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    // sum over 83 pairs vs 84 squares per day
    let rho = num / den * 84.0 / 83.0;
    assert!((rho - 0.3).abs() < 0.01, "{rho}");

    let neg = gen_ar1(&SimSpec::new(SimModel::Ar1 { phi: -0.99, sigma: 1e-3 }, 10_000, 29)).unwrap();
    let mean_vr = neg.days.iter().map(|d| variance_ratio(&d.returns, 2).unwrap().vr).sum::<f64>() / 1e4;
    assert!(mean_vr < 0.5, "{mean_vr}");
}
