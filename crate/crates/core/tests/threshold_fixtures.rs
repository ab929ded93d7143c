//! Roots of the threshold function, frozen from an independent
//! arbitrary-precision bisection with tanh-sinh quadrature.

use approx::assert_abs_diff_eq;
use graphnls::functionals::{instability_threshold, threshold_function, ThresholdMode};

const FIXTURES: [(f64, f64); 6] = [
    (5.01, 0.003_909_366_663_397_927_798_4),
    (5.5, 0.162_216_957_072_637_663_41),
    (6.0, 0.279_472_937_838_809_210_71),
    (7.0, 0.440_949_726_105_446_731_94),
    (9.0, 0.621_140_137_727_381_857_44),
    (200.0, 0.989_746_989_914_719_509_42),
];

#[test]
fn roots_match_fixtures() {
    for (p, xi) in FIXTURES {
        let r = instability_threshold(p, ThresholdMode::DeltaGraph { alpha: -1.0, n_edges: 3 }).unwrap();
        assert_abs_diff_eq!(r.xi, xi, epsilon = 1e-12);
        assert!(threshold_function(r.xi, p).abs() < 1e-12, "p = {p}");
        assert_eq!(r.sign_changes, 1, "p = {p}");
    }
}

#[test]
fn frequencies_follow_from_the_root() {
    let (p, xi) = FIXTURES[3];
    let g = instability_threshold(p, ThresholdMode::DeltaGraph { alpha: -2.0, n_edges: 4 }).unwrap();
    assert_abs_diff_eq!(g.omega_star, 4.0 / (16.0 * xi * xi), epsilon = 1e-10);
    let l = instability_threshold(p, ThresholdMode::DeltaPrime { gamma: 2.0 }).unwrap();
    assert_eq!(l.xi, g.xi);
    assert_abs_diff_eq!(l.omega_star, 1.0 / (xi * xi), epsilon = 1e-10);
}

#[test]
fn root_tends_to_zero_as_p_decreases_to_five() {
    let xs: Vec<f64> = [5.001, 5.01, 5.1, 5.5]
        .iter()
        .map(|&p| instability_threshold(p, ThresholdMode::DeltaPrime { gamma: 1.0 }).unwrap().xi)
        .collect();
    assert!(xs.windows(2).all(|w| w[0] < w[1]), "{xs:?}");
    assert!(xs[0] < 1e-3);
}
