//! Small numeric helpers.

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Compensated arithmetic mean; `None` for an empty slice.
pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(compensated_sum(values.iter().copied()) / values.len() as f64)
    }
}

/// Two-pass sample variance with divisor `n - ddof`.
pub fn variance(values: &[f64], ddof: usize) -> Option<f64> {
    let mu = mean(values)?;
    if values.len() <= ddof {
        return None;
    }
    let ss = compensated_sum(values.iter().map(|v| (v - mu) * (v - mu)));
    Some(ss / (values.len() - ddof) as f64)
}

/// Sample autocorrelation at `lag` (biased, divisor `n`).
pub fn autocorrelation(values: &[f64], lag: usize) -> Option<f64> {
    if lag >= values.len() {
        return None;
    }
    let mu = mean(values)?;
    let denom = compensated_sum(values.iter().map(|v| (v - mu) * (v - mu)));
    if denom == 0.0 {
        return None;
    }
    let num = compensated_sum(
        values[lag..]
            .iter()
            .zip(values)
            .map(|(a, b)| (a - mu) * (b - mu)),
    );
    Some(num / denom)
}
