//! Log-log fits for scaling laws.

use serde::Serialize;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Least-squares fit of `ln y = slope · ln x + intercept`.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(invalid("points", "x and y lengths differ"));
    }
    if x.len() < 2 {
        return Err(invalid("points", "at least two points required"));
    }
    if x.iter().chain(y).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(invalid("points", "log-log fit needs positive finite data"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(invalid("points", "abscissae are all equal"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok(LineFit { slope, intercept: my - slope * mx })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub sigma: f64,
    pub relative_slope_error: f64,
    /// `μ_ε / ε^σ` per point.
    pub d_eps: Vec<f64>,
    /// `(max − min)/min` of `d_ε` over points within a decade of the smallest ε.
    pub d_variation_last_decade: f64,
}

impl ScalingFit {
    pub fn slope_passes(&self, tol: f64) -> bool {
        self.relative_slope_error <= tol
    }
}

/// Fits `ln μ` against `ln ε`; needs at least four points spanning a decade.
pub fn fit_scaling(eps: &[f64], mu: &[f64], sigma: f64) -> Result<ScalingFit> {
    if eps.len() < 4 {
        return Err(invalid("points", format!("need at least 4 points, got {}", eps.len())));
    }
    let lo = eps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eps.iter().copied().fold(0.0, f64::max);
    if hi < 10.0 * lo {
        return Err(invalid("points", "eps values must span at least a decade"));
    }
    let fit = loglog_fit(eps, mu)?;
    let d_eps: Vec<f64> = eps.iter().zip(mu).map(|(e, m)| m / e.powf(sigma)).collect();
    let tail: Vec<f64> = eps.iter().zip(&d_eps).filter(|(e, _)| **e <= 10.0 * lo).map(|(_, d)| *d).collect();
    let dmax = tail.iter().copied().fold(0.0, f64::max);
    let dmin = tail.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ScalingFit {
        slope: fit.slope,
        intercept: fit.intercept,
        sigma,
        relative_slope_error: (fit.slope - sigma).abs() / sigma,
        d_eps,
        d_variation_last_decade: (dmax - dmin) / dmin,
    })
}
