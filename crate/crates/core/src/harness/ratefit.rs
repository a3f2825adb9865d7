//! Log-log rate fitting: estimates the exponent of mean suboptimality as a
//! function of the sweep parameter by ordinary least squares.

use crate::error::{Error, Result};
use serde::Serialize;

/// OLS fit of ln(mean) against ln(sweep value).
#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// (ln sweep value, ln mean) pairs that entered the fit.
    pub points: Vec<(f64, f64)>,
    /// Points dropped because their mean was nonpositive.
    pub dropped: usize,
}

/// Fit a rate exponent from (sweep value, mean suboptimality) pairs.
/// Nonpositive means are dropped with a count; fewer than three surviving
/// points is an error.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    let mut logs: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    let mut dropped = 0;
    for &(n, y) in points {
        assert!(n > 0.0, "sweep values must be positive");
        if y > 0.0 {
            logs.push((n.ln(), y.ln()));
        } else {
            dropped += 1;
        }
    }
    if logs.len() < 3 {
        return Err(Error::TooFewRatePoints {
            kept: logs.len(),
            dropped,
        });
    }
    let n = logs.len() as f64;
    let xbar = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let ybar = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - xbar).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - xbar) * (p.1 - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss_tot: f64 = logs.iter().map(|p| (p.1 - ybar).powi(2)).sum();
    let ss_res: f64 = logs
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points: logs,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_rng;
    use rand::Rng;

    #[test]
    fn exact_power_laws() {
        let pts: Vec<(f64, f64)> = (6..=12).map(|k| {
            let n = (1u64 << k) as f64;
            (n, 1.0 / n)
        }).collect();
        let fit = fit_rate(&pts).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-9);
        assert!(fit.r_squared > 1.0 - 1e-12);

        let pts: Vec<(f64, f64)> = (6..=12).map(|k| {
            let n = (1u64 << k) as f64;
            (n, 1.0 / n.sqrt())
        }).collect();
        let fit = fit_rate(&pts).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-9);
    }

    #[test]
    fn noisy_sqrt_law_within_tolerance() {
        let mut rng = derive_rng(5, &[0xF17]);
        let pts: Vec<(f64, f64)> = (6..=12).map(|k| {
            let n = (1u64 << k) as f64;
            let noise = 1.0 + 0.05 * (rng.gen::<f64>() * 2.0 - 1.0);
            (n, 3.0 / n.sqrt() * noise)
        }).collect();
        let fit = fit_rate(&pts).unwrap();
        assert!((fit.slope + 0.5).abs() < 0.1, "slope {}", fit.slope);
    }

    #[test]
    fn drops_nonpositive_and_errors_when_too_few() {
        let pts = vec![(10.0, 0.0), (20.0, 0.1), (40.0, 0.05), (80.0, 0.02)];
        let fit = fit_rate(&pts).unwrap();
        assert_eq!(fit.dropped, 1);
        assert_eq!(fit.points.len(), 3);
        let bad = vec![(10.0, 0.0), (20.0, 0.0), (40.0, 0.05), (80.0, 0.02)];
        assert!(fit_rate(&bad).is_err());
    }
}
