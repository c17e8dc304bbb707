use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares power law `value ≈ exp(intercept) (1+t)^slope`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    pub points: usize,
}

/// Ordinary least squares of `log(value)` against `log(1+t)` over the
/// samples with `t` inside `window` (inclusive).
pub fn decay_rate_fit(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(Error::Fit(format!(
            "{} times but {} values",
            times.len(),
            values.len()
        )));
    }
    let (lo, hi) = window;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t < lo || t > hi {
            continue;
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Fit(format!("non-positive value {v} at t = {t}")));
        }
        xs.push((1.0 + t).ln());
        ys.push(v.ln());
    }
    let n = xs.len();
    if n < 5 {
        return Err(Error::Fit(format!(
            "{n} points inside [{lo}, {hi}], need at least 5"
        )));
    }

    let nf = n as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let syy: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all fit times coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    // A constant series is fitted perfectly by a zero slope.
    let r2 = if syy <= f64::EPSILON * f64::EPSILON * nf {
        1.0
    } else {
        1.0 - ss_res / syy
    };
    Ok(DecayFit {
        slope,
        intercept,
        r2,
        residual: (ss_res / nf).sqrt(),
        points: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_times(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n)
            .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
            .collect()
    }

    #[test]
    fn exact_power_law() {
        let t = log_times(12, 100.0, 1e4);
        let v: Vec<f64> = t.iter().map(|t| (1.0 + t).powf(-1.5)).collect();
        let fit = decay_rate_fit(&t, &v, (100.0, 1e4)).unwrap();
        assert!((fit.slope + 1.5).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-10);
    }

    #[test]
    fn constant_series() {
        let t = log_times(8, 1.0, 50.0);
        let fit = decay_rate_fit(&t, &vec![3.0; 8], (0.0, 100.0)).unwrap();
        assert!(fit.slope.abs() < 1e-14);
        assert_eq!(fit.r2, 1.0);
    }

    #[test]
    fn window_restricts_points() {
        let t = log_times(20, 1.0, 1e4);
        let v: Vec<f64> = t
            .iter()
            .map(|&t| if t < 100.0 { 1.0 } else { (1.0 + t).powi(-1) })
            .collect();
        let fit = decay_rate_fit(&t, &v, (100.0, 1e4)).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        let err = decay_rate_fit(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0], (0.0, 10.0)).unwrap_err();
        assert!(matches!(err, Error::Fit(_)));
    }

    #[test]
    fn non_positive_value() {
        let t = [1.0, 2.0, 3.0, 4.0, 5.0];
        let err = decay_rate_fit(&t, &[1.0, 0.5, 0.0, 0.2, 0.1], (0.0, 10.0)).unwrap_err();
        assert!(matches!(err, Error::Fit(_)));
    }
}
