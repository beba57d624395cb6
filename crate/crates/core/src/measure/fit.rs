use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line through `(log δ, log V)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub log_constant: f64,
    pub r_squared: f64,
    pub delta_range: (f64, f64),
    /// Standard error of the slope from the regression residuals.
    pub exponent_std_error: f64,
}

pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 4 {
        return Err(Error::InvalidInput(format!("power-law fit needs at least 4 points, got {}", points.len())));
    }
    let bad: Vec<f64> = points.iter().filter(|(_, v)| !(*v > 0.0)).map(|(d, _)| *d).collect();
    if !bad.is_empty() {
        return Err(Error::NonPositiveVolume(bad));
    }
    if let Some((d, _)) = points.iter().find(|(d, _)| !(*d > 0.0)) {
        return Err(Error::OutOfRange { name: "delta", value: *d, range: "(0, inf)" });
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(d, _)| d.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, v)| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidInput("power-law fit needs at least two distinct deltas".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - ssr / syy).clamp(0.0, 1.0) } else { 1.0 };
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(PowerLawFit {
        exponent: slope,
        log_constant: intercept,
        r_squared,
        delta_range: (lo, hi),
        exponent_std_error: (ssr / (n - 2.0) / sxx).sqrt(),
    })
}
