//! `∫_ξ^1 (1−s²)^q ds` against the regularized incomplete beta function:
//! with `s² = u` it equals `½B(½, q+1)(1 − I_{ξ²}(½, q+1))` for `ξ ≥ 0`.

use graphnls::numerics::sech_power_integral;
use proptest::prelude::*;
use statrs::function::beta::{beta, beta_reg};

fn oracle(xi: f64, p: f64) -> f64 {
    let b = 1.0 + 2.0 / (p - 1.0);
    let full = beta(0.5, b);
    let upper = 0.5 * full * (1.0 - beta_reg(0.5, b, xi * xi));
    if xi >= 0.0 {
        upper
    } else {
        full - upper
    }
}

#[test]
fn cubic_case_in_closed_form() {
    // p = 3: ∫_ξ^1 (1 − s²) ds = 2/3 − ξ + ξ³/3
    for xi in [-0.9, -0.2, 0.0, 0.35, 0.99] {
        let exact = 2.0 / 3.0 - xi + xi * xi * xi / 3.0;
        assert!((sech_power_integral(xi, 3.0) - exact).abs() < 1e-13);
        assert!((oracle(xi, 3.0) - exact).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn matches_incomplete_beta(xi in -0.999f64..0.999, p in 1.5f64..30.0) {
        let got = sech_power_integral(xi, p);
        let want = oracle(xi, p);
        prop_assert!((got - want).abs() < 1e-11 * (1.0 + want), "{got} vs {want}");
    }
}
