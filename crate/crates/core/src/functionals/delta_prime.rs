use crate::error::{Error, Result};
use crate::numerics::{bisect, sech_power_integral};
use crate::profiles::{asymmetric_threshold, AsymmetricRoots, Branch, DeltaPrimeParams};

fn amp(params: &DeltaPrimeParams) -> f64 {
    (params.p + 1.0) * params.omega / 2.0
}

/// `(1 − t²)` on each side of the origin, as `(right, left)`.
fn side_defects(params: &DeltaPrimeParams) -> (f64, f64) {
    match (params.branch, params.roots) {
        (Branch::Odd, _) => {
            let t = 2.0 / (params.gamma * params.omega.sqrt());
            (1.0 - t * t, 1.0 - t * t)
        }
        (Branch::Asymmetric, Some(r)) => (1.0 - r.t1 * r.t1, r.one_minus_t2_sq()),
        (Branch::AsymmetricSwapped, Some(r)) => (r.one_minus_t2_sq(), 1.0 - r.t1 * r.t1),
        _ => unreachable!("asymmetric branch always carries roots"),
    }
}

fn side_tanh(params: &DeltaPrimeParams) -> (f64, f64) {
    match (params.branch, params.roots) {
        (Branch::Odd, _) => {
            let t = 2.0 / (params.gamma * params.omega.sqrt());
            (t, t)
        }
        (Branch::Asymmetric, Some(r)) => (r.t1, r.t2),
        (Branch::AsymmetricSwapped, Some(r)) => (r.t2, r.t1),
        _ => unreachable!("asymmetric branch always carries roots"),
    }
}

/// `|φ(0+) − φ(0−)|²` from the closed form.
pub fn jump_sq_closed(params: &DeltaPrimeParams) -> f64 {
    let e = 1.0 / (params.p - 1.0);
    let (r, l) = side_defects(params);
    let s = r.powf(e) + l.powf(e);
    amp(params).powf(2.0 * e) * s * s
}

/// `‖φ‖_{p+1}^{p+1}` from the closed form, one `∫_t^1(1−s²)^{2/(p−1)}ds` per half-line.
pub fn delta_prime_lp_norm_closed(params: &DeltaPrimeParams) -> f64 {
    let p = params.p;
    let (r, l) = side_tanh(params);
    2.0 / ((p - 1.0) * params.omega.sqrt())
        * amp(params).powf((p + 1.0) / (p - 1.0))
        * (sech_power_integral(r, p) + sech_power_integral(l, p))
}

fn condition_from_roots(r: &AsymmetricRoots, omega: f64, p: f64) -> f64 {
    let beta = 0.5 * (p - 1.0);
    let e = 1.0 / (p - 1.0);
    let s = (1.0 - r.t1 * r.t1).powf(e) + r.one_minus_t2_sq().powf(e);
    0.5 * (p - 5.0) * (sech_power_integral(r.t1, p) + sech_power_integral(r.t2, p)) - s * s / (beta * omega.sqrt())
}

/// Left side of the instability condition for the asymmetric wave,
/// `((p−5)/2)[∫_{t₁}^1 + ∫_{t₂}^1](1−s²)^{2/(p−1)}ds − (1/(β√ω))[(1−t₁²)^{1/(p−1)} + (1−t₂²)^{1/(p−1)}]²`
/// with `β = (p−1)/2`. Positive values mean `∂²_λE_γ(φ^λ)|_{λ=1} ≤ 0`.
pub fn delta_prime_instability_condition(params: &DeltaPrimeParams) -> Result<f64> {
    let r = params.roots.ok_or_else(|| {
        Error::InvalidArgument("the instability condition concerns the asymmetric branches".into())
    })?;
    Ok(condition_from_roots(&r, params.omega, params.p))
}

/// Empirical frequency above which the asymmetric condition stays positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Omega2Estimate {
    pub omega2: f64,
    /// Bracket of the last negative-to-positive crossing on the sweep.
    pub lower: f64,
    pub upper: f64,
    /// Sign changes seen on the sweep.
    pub sign_changes: usize,
}

/// Sweep `ω` geometrically from just above the existence threshold to
/// `10⁶×` it, then bisect the last crossing to `1e−10` relative.
pub fn estimate_omega2(gamma: f64, p: f64) -> Result<Omega2Estimate> {
    if !(p.is_finite() && p > 5.0) {
        return Err(Error::InvalidArgument(format!("ω₂ is only defined for p > 5, got {p}")));
    }
    let thr = asymmetric_threshold(gamma, p);
    let eval = |omega: f64| -> Result<f64> {
        let r = crate::profiles::solve_t1_t2(gamma, omega, p)?;
        Ok(condition_from_roots(&r, omega, p))
    };
    let n = 400;
    let (lo, hi) = (thr * (1.0 + 1e-4), thr * 1e6);
    let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
    let mut prev: Option<(f64, f64)> = None;
    let mut bracket = None;
    let mut sign_changes = 0;
    for i in 0..n {
        let w = lo * ratio.powi(i);
        let v = match eval(w) {
            Ok(v) => v,
            Err(e) => {
                log::debug!("ω₂ sweep skipped ω = {w}: {e}");
                continue;
            }
        };
        if let Some((pw, pv)) = prev {
            if pv.signum() != v.signum() {
                sign_changes += 1;
                if pv < 0.0 {
                    bracket = Some((pw, w));
                } else {
                    bracket = None;
                }
            }
        }
        prev = Some((w, v));
    }
    match prev {
        Some((_, v)) if v > 0.0 => {}
        _ => return Err(Error::NoRoot("condition not positive at the top of the sweep".into())),
    }
    let (a, b) = match bracket {
        Some(ab) => ab,
        None => {
            // positive over the whole sweep
            return Ok(Omega2Estimate { omega2: lo, lower: thr, upper: lo, sign_changes });
        }
    };
    let mut failure = None;
    let root = bisect(
        |w| match eval(w) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                f64::NAN
            }
        },
        a,
        b,
        1e-10 * a,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Omega2Estimate { omega2: root.root, lower: a, upper: b, sign_changes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn large_frequency_condition_is_positive() {
        let w = DeltaPrimeParams::new(2.0, 1e6, 6.0, Branch::Asymmetric).unwrap();
        let v = delta_prime_instability_condition(&w).unwrap();
        assert!(v > 0.0);
        let limit = 0.5 * sech_power_integral(0.0, 6.0);
        assert!((v - limit).abs() < 0.05 * limit);
    }

    #[test]
    fn p_five_condition_is_negative() {
        let w = DeltaPrimeParams::new(2.0, 10.0, 5.0, Branch::Asymmetric).unwrap();
        assert!(delta_prime_instability_condition(&w).unwrap() < 0.0);
    }

    #[test]
    fn odd_branch_has_no_condition() {
        let w = DeltaPrimeParams::new(2.0, 10.0, 6.0, Branch::Odd).unwrap();
        assert!(delta_prime_instability_condition(&w).is_err());
    }

    #[test]
    fn swapped_branch_shares_closed_values() {
        let a = DeltaPrimeParams::new(2.0, 8.0, 6.0, Branch::Asymmetric).unwrap();
        let b = DeltaPrimeParams::new(2.0, 8.0, 6.0, Branch::AsymmetricSwapped).unwrap();
        assert_eq!(jump_sq_closed(&a), jump_sq_closed(&b));
        assert!((delta_prime_lp_norm_closed(&a) - delta_prime_lp_norm_closed(&b)).abs() < 1e-14);
    }

    #[test]
    fn omega2_lies_in_the_observed_window() {
        let est = estimate_omega2(2.0, 6.0).unwrap();
        assert!(est.omega2 > 4.2 && est.omega2 < 7.0, "{est:?}");
        let below = DeltaPrimeParams::new(2.0, est.omega2 * 0.99, 6.0, Branch::Asymmetric).unwrap();
        let above = DeltaPrimeParams::new(2.0, est.omega2 * 1.01, 6.0, Branch::Asymmetric).unwrap();
        assert!(delta_prime_instability_condition(&below).unwrap() < 0.0);
        assert!(delta_prime_instability_condition(&above).unwrap() > 0.0);
    }
}
