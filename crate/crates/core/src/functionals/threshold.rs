use crate::error::{Error, Result};
use crate::numerics::{bisect, sech_power_integral};

/// `f(ξ) = ((p−5)/2)∫_ξ^1 (1−s²)^{2/(p−1)} ds − ξ(1−ξ²)^{2/(p−1)}`.
pub fn threshold_function(xi: f64, p: f64) -> f64 {
    let q = 2.0 / (p - 1.0);
    0.5 * (p - 5.0) * sech_power_integral(xi, p) - xi * (1.0 - xi * xi).powf(q)
}

/// `f′(ξ) = −((p−3)/2)(1−ξ²)^q + 2qξ²(1−ξ²)^{q−1}`, `q = 2/(p−1)`.
pub fn threshold_function_derivative(xi: f64, p: f64) -> f64 {
    let q = 2.0 / (p - 1.0);
    let w = 1.0 - xi * xi;
    -0.5 * (p - 3.0) * w.powf(q) + 2.0 * q * xi * xi * w.powf(q - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMode {
    /// `ω₁ = α²/(N²ξ²)`.
    DeltaGraph { alpha: f64, n_edges: usize },
    /// `ω₃ = 4/(γ²ξ²)`.
    DeltaPrime { gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdResult {
    pub xi: f64,
    pub omega_star: f64,
    /// `|f(ξ)|`.
    pub residual: f64,
    /// Sign changes of `f` seen on the uniform scan of `(0, 1)`.
    pub sign_changes: usize,
}

const SCAN_POINTS: usize = 1000;

fn count_sign_changes(p: f64) -> usize {
    let mut changes = 0;
    let mut prev = threshold_function(0.5 / SCAN_POINTS as f64, p);
    for i in 1..SCAN_POINTS {
        let v = threshold_function(i as f64 / SCAN_POINTS as f64, p);
        if v != 0.0 && prev != 0.0 && v.signum() != prev.signum() {
            changes += 1;
        }
        if v != 0.0 {
            prev = v;
        }
    }
    changes
}

/// Unique root `ξ ∈ (0,1)` of `f` and the associated frequency threshold.
///
/// Bisection to floating-point resolution, then one Newton step kept only if
/// it lowers `|f|`. The root is also checked to be the only sign change on a
/// 10³-point scan; more than one is logged as a warning and reported.
pub fn instability_threshold(p: f64, mode: ThresholdMode) -> Result<ThresholdResult> {
    if !(p.is_finite() && p > 5.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold equation has no root in (0,1) for p <= 5 (got p = {p})"
        )));
    }
    let f = |x: f64| threshold_function(x, p);
    let mut hi = 1.0 - 1e-12;
    while f(hi) >= 0.0 {
        hi = 1.0 - (1.0 - hi) * 0.1;
        if 1.0 - hi < 1e-15 {
            return Err(Error::NoRoot(format!("f does not turn negative near 1 for p = {p}")));
        }
    }
    let b = bisect(f, 0.0, hi, 0.0)?;
    let mut xi = b.root;
    let mut residual = f(xi).abs();
    let d = threshold_function_derivative(xi, p);
    if d != 0.0 {
        let cand = xi - f(xi) / d;
        if cand > 0.0 && cand < 1.0 && f(cand).abs() < residual {
            xi = cand;
            residual = f(cand).abs();
        }
    }
    let sign_changes = count_sign_changes(p);
    if sign_changes != 1 {
        log::warn!("threshold function for p = {p} shows {sign_changes} sign changes on the scan");
    }
    let omega_star = match mode {
        ThresholdMode::DeltaGraph { alpha, n_edges } => {
            let n = n_edges as f64;
            alpha * alpha / (n * n * xi * xi)
        }
        ThresholdMode::DeltaPrime { gamma } => 4.0 / (gamma * gamma * xi * xi),
    };
    Ok(ThresholdResult { xi, omega_star, residual, sign_changes })
}
