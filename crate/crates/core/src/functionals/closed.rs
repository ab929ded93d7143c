use crate::error::{Error, Result};
use crate::grid::StarGraphGrid;
use crate::numerics::sech_power_integral;
use crate::profiles::{build_profile_delta, WaveParams};

use super::threshold::threshold_function;
use super::{power_weight, second_variation_from_norms};

fn amp_sq(params: &WaveParams) -> f64 {
    ((params.p + 1.0) * params.omega / 2.0).powf(2.0 / (params.p - 1.0))
}

/// `tanh` of the shift used on edge `j`.
fn edge_tanh(params: &WaveParams, j: usize) -> f64 {
    let d = 2.0 * params.k as f64 - params.n_edges as f64;
    let t = params.alpha / (d * params.omega.sqrt());
    if j < params.k {
        -t
    } else {
        t
    }
}

/// `‖Φ_k^α‖_{p+1}^{p+1}` from the closed form; for `k = 0` this is
/// `(2N/((p−1)√ω))·((p+1)ω/2)^{(p+1)/(p−1)}·∫_ξ^1 (1−s²)^{2/(p−1)} ds`.
pub fn profile_lp_norm_closed(params: &WaveParams) -> Result<f64> {
    params.validate()?;
    let p = params.p;
    let pref = 2.0 / ((p - 1.0) * params.omega.sqrt())
        * ((p + 1.0) * params.omega / 2.0).powf((p + 1.0) / (p - 1.0));
    let sum: f64 = (0..params.n_edges).map(|j| sech_power_integral(edge_tanh(params, j), p)).sum();
    Ok(pref * sum)
}

/// `|φ(0)|² = [((p+1)ω/2)(1 − tanh² a_k)]^{2/(p−1)}`; equals `[((p+1)ω/2)(1−ξ²)]^{2/(p−1)}` for `k = 0`.
pub fn vertex_abs2_closed(params: &WaveParams) -> Result<f64> {
    params.validate()?;
    let t = edge_tanh(params, params.n_edges - 1);
    Ok(amp_sq(params) * (1.0 - t * t).powf(2.0 / (params.p - 1.0)))
}

/// Ground level `d_eq(ω) = ((p−1)/(2(p+1)))·‖Φ₀^α‖_{p+1}^{p+1}`.
pub fn dc_ground_level(params: &WaveParams) -> Result<f64> {
    if params.k != 0 {
        return Err(Error::InvalidArgument("the ground level uses the k = 0 profile".into()));
    }
    Ok(power_weight(params.p) * profile_lp_norm_closed(params)?)
}

/// `∂²_λ E(Φ^λ)|_{λ=1}` in closed form, `−(√ω/2)((p+1)ω/2)^{2/(p−1)} Σ_j f(ξ_j)`
/// with `f` the threshold function and `ξ_j` the `tanh` of the edge shift.
pub fn second_variation_closed(params: &WaveParams) -> Result<f64> {
    params.validate()?;
    let sum: f64 = (0..params.n_edges).map(|j| threshold_function(edge_tanh(params, j), params.p)).sum();
    Ok(-0.5 * params.omega.sqrt() * amp_sq(params) * sum)
}

/// `∂²_λ E(Φ^λ)|_{λ=1}` evaluated two ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondVariation {
    /// From sampled `‖Φ′‖²` and `‖Φ‖_{p+1}^{p+1}`.
    pub sampled: f64,
    pub closed: f64,
    /// `f(ξ)`; for `k = 0` its sign is opposite to the second variation.
    pub f_xi: f64,
}

impl SecondVariation {
    /// Sampled and closed values agree in sign (or both vanish within `tol`).
    pub fn consistent(&self, tol: f64) -> bool {
        (self.sampled - self.closed).abs() <= tol || self.sampled.signum() == self.closed.signum()
    }
}

#[allow(non_snake_case)]
pub fn second_variation_E(params: &WaveParams, grid: &StarGraphGrid) -> Result<SecondVariation> {
    let phi = build_profile_delta(params, grid)?;
    let s = phi.samples();
    let sampled = second_variation_from_norms(s.kinetic(), s.lq_power(params.p + 1.0), params.p);
    Ok(SecondVariation {
        sampled,
        closed: second_variation_closed(params)?,
        f_xi: threshold_function(params.xi(), params.p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Rule;

    #[test]
    fn free_cubic_norm() {
        let w = WaveParams::ground(2, 0.0, 1.0, 3.0).unwrap();
        // 2 edges × ∫₀^∞ 4 sech⁴ = 2 × 8/3
        assert!((profile_lp_norm_closed(&w).unwrap() - 16.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn norm_vanishes_at_existence_edge() {
        let alpha = -1.0;
        let w = WaveParams::ground(3, alpha, alpha * alpha / 9.0 * (1.0 + 1e-10), 3.0).unwrap();
        assert!(profile_lp_norm_closed(&w).unwrap() < 1e-6);
    }

    #[test]
    fn vertex_value_formula() {
        let w = WaveParams::ground(3, -1.0, 1.0, 3.0).unwrap();
        assert!((vertex_abs2_closed(&w).unwrap() - 16.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn ground_level_increases_with_frequency() {
        let levels: Vec<f64> = [1.0, 2.0, 4.0]
            .iter()
            .map(|&w| dc_ground_level(&WaveParams::ground(3, -0.5, w, 4.0).unwrap()).unwrap())
            .collect();
        assert!(levels[0] < levels[1] && levels[1] < levels[2]);
    }

    #[test]
    fn closed_second_variation_matches_samples() {
        for (alpha, p, k, n) in [(-1.0, 7.0, 0, 3), (1.0, 6.0, 0, 3), (0.5, 3.0, 1, 3), (-1.0, 4.0, 1, 5)] {
            let w = WaveParams::new(n, alpha, 2.0, p, k).unwrap();
            let l = w.default_length();
            let g = StarGraphGrid::new(n, l, 20001).unwrap().with_rule(Rule::Simpson).unwrap();
            let sv = second_variation_E(&w, &g).unwrap();
            let scale = profile_lp_norm_closed(&w).unwrap();
            assert!((sv.sampled - sv.closed).abs() < 1e-5 * scale, "{alpha} {p} {k}: {sv:?}");
        }
    }
}
