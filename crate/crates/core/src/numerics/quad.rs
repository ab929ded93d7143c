use std::f64::consts::FRAC_PI_2;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Recursion stops at `max_depth`; the Richardson-corrected estimate of the
/// deepest level is returned in that case.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(&f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `∫_ξ^1 (1 − s²)^{2/(p−1)} ds` for `ξ ∈ [−1, 1]`.
///
/// Integrated in the angle variable `s = sin θ`, where the integrand becomes
/// `cos^{2q+1} θ` and loses the derivative singularity at `s = 1`.
pub fn sech_power_integral(xi: f64, p: f64) -> f64 {
    assert!((-1.0..=1.0).contains(&xi), "xi = {xi} outside [-1, 1]");
    let exponent = 4.0 / (p - 1.0) + 1.0;
    let lower = xi.asin();
    // Split at the origin so that the tolerance is not spent on the far half.
    let g = |t: f64| t.cos().max(0.0).powf(exponent);
    if lower < 0.0 {
        adaptive_simpson(g, lower, 0.0, 1e-14, 40) + adaptive_simpson(g, 0.0, FRAC_PI_2, 1e-14, 40)
    } else {
        adaptive_simpson(g, lower, FRAC_PI_2, 1e-14, 40)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x + 1.0, -1.0, 2.0, 1e-14, 10);
        assert!((v - (15.0 / 4.0 - 3.0 + 3.0)).abs() < 1e-13);
    }

    #[test]
    fn simpson_handles_sqrt_endpoint() {
        let v = adaptive_simpson(|x: f64| x.sqrt(), 0.0, 1.0, 1e-13, 50);
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn power_integral_elementary_case() {
        // p = 3: ∫_0^1 (1 − s²) ds = 2/3
        assert!((sech_power_integral(0.0, 3.0) - 2.0 / 3.0).abs() < 1e-13);
        // p = 5: ∫_0^1 (1 − s²)^{1/2} ds = π/4
        assert!((sech_power_integral(0.0, 5.0) - std::f64::consts::FRAC_PI_4).abs() < 1e-13);
        // full line p = 3: 4/3
        assert!((sech_power_integral(-1.0, 3.0) - 4.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn power_integral_vanishes_at_one() {
        assert_eq!(sech_power_integral(1.0, 7.0), 0.0);
        assert!(sech_power_integral(1.0 - 1e-9, 7.0) < 1e-9);
    }

    proptest! {
        #[test]
        fn power_integral_reflection(xi in 0.0f64..1.0, p in 1.2f64..40.0) {
            // the integrand is even, so J(ξ) + J(−ξ) = 2J(0)
            let lhs = sech_power_integral(xi, p) + sech_power_integral(-xi, p);
            prop_assert!((lhs - 2.0 * sech_power_integral(0.0, p)).abs() < 1e-12);
        }

        #[test]
        fn power_integral_decreasing(a in -1.0f64..1.0, b in -1.0f64..1.0, p in 1.2f64..40.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(sech_power_integral(lo, p) >= sech_power_integral(hi, p) - 1e-14);
        }

        #[test]
        fn simpson_is_linear(c in -5.0f64..5.0, k in 0.1f64..4.0) {
            let f = |x: f64| (k * x).sin();
            let g = |x: f64| x * x;
            let both = adaptive_simpson(|x| f(x) + c * g(x), 0.0, 2.0, 1e-13, 40);
            let split = adaptive_simpson(f, 0.0, 2.0, 1e-13, 40) + c * adaptive_simpson(g, 0.0, 2.0, 1e-13, 40);
            prop_assert!((both - split).abs() < 1e-11 * (1.0 + c.abs()));
        }
    }
}
