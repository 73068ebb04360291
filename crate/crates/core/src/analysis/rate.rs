//! Power-law rate estimation by least squares in log-log space.

use crate::error::{Error, Result};

pub const MIN_FIT_POINTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub n_points: usize,
}

/// Default fit window `[50, 0.9 tf]`. Horizons too short for it start at
/// the geometric midpoint of `[t0, 0.9 tf]` instead.
pub fn default_window(t0: f64, tf: f64) -> (f64, f64) {
    let hi = 0.9 * tf;
    if hi > 50.0 {
        (50.0, hi)
    } else {
        ((t0.max(f64::MIN_POSITIVE) * hi).sqrt(), hi)
    }
}

/// Fit `log value = intercept + slope · log t` over samples with
/// `t ∈ [lo, hi]`. Non-positive and non-finite values are skipped.
pub fn fit_rate(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<RateFit> {
    if times.len() != values.len() {
        return Err(Error::dim(format!(
            "{} times but {} values",
            times.len(),
            values.len()
        )));
    }
    let (lo, hi) = window;
    if !(lo < hi) || !(lo > 0.0) {
        return Err(Error::arg(format!("invalid fit window [{lo}, {hi}]")));
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, v)| **t >= lo && **t <= hi && **v > 0.0 && v.is_finite())
        .map(|(t, v)| (t.ln(), v.ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(pts.len()));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::arg("all fit points share one time"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        window,
        n_points: pts.len(),
    })
}
