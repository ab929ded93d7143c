use crate::error::{Error, Result};
use crate::grid::GraphField;
use crate::profiles::Scalable;

use super::DeltaModel;

/// The `λ > 0` with `I_ω(λV) = 0`:
/// `λ₁ = ((‖V′‖² + ω‖V‖² + α|v(0)|²)/‖V‖_{p+1}^{p+1})^{1/(p−1)}`.
///
/// The root is re-checked on the rescaled field to `1e−8` relative.
pub fn lambda_one(model: &DeltaModel, v: &GraphField, omega: f64) -> Result<f64> {
    let n = model.norms(v);
    if n.power <= 0.0 {
        return Err(Error::Precondition("λ₁ needs a field with positive L^{p+1} norm".into()));
    }
    let quad = n.kinetic + omega * n.mass + model.alpha * n.vertex_abs2;
    if quad <= 0.0 {
        return Err(Error::Precondition(format!(
            "quadratic part ‖V′‖² + ω‖V‖² + α|v(0)|² = {quad:e} is not positive"
        )));
    }
    let lambda = (quad / n.power).powf(1.0 / (model.p - 1.0));
    let scaled = v.scaled(lambda.into());
    let resid = model.nehari(&scaled, omega);
    let scale = lambda * lambda * quad;
    if resid.abs() > 1e-8 * scale {
        return Err(Error::Postcondition(format!("I_ω(λ₁V) = {resid:e} relative to {scale:e}")));
    }
    Ok(lambda)
}

/// `λ₀ = (‖Φ‖_{p+1}^{p+1}/‖V‖_{p+1}^{p+1})^{2/(p−1)}`, so that `‖V^{λ₀}‖_{p+1} = ‖Φ‖_{p+1}`.
///
/// Requires `‖V‖_{p+1} ≥ ‖Φ‖_{p+1}`; the result is checked by rescaling `V`
/// to `1e−6` relative.
pub fn lambda_zero(v: &GraphField, profile: &GraphField, p: f64) -> Result<f64> {
    let nv = v.samples().lq_power(p + 1.0);
    let nphi = profile.samples().lq_power(p + 1.0);
    if nv < nphi * (1.0 - 1e-12) {
        return Err(Error::Precondition(format!(
            "λ₀ needs ‖V‖_{{p+1}}^{{p+1}} = {nv:e} >= ‖Φ‖_{{p+1}}^{{p+1}} = {nphi:e}"
        )));
    }
    let lambda = (nphi / nv).powf(2.0 / (p - 1.0));
    let check = v.scale(lambda)?.samples().lq_power(p + 1.0);
    if (check - nphi).abs() > 1e-6 * nphi {
        return Err(Error::Postcondition(format!(
            "‖V^λ₀‖_{{p+1}}^{{p+1}} = {check:e} differs from {nphi:e}"
        )));
    }
    Ok(lambda)
}

/// `g(λ) = β(λ² + (β−3)λ^β)/(λ(2−λ)) − (2λ^β − βλ² − 2 + β)/(λ−1)²`, `β = (p−1)/2`.
///
/// The second quotient is evaluated from its binomial series when `|λ−1| < 0.05`.
pub fn g_inequality(lambda: f64, p: f64) -> f64 {
    let beta = 0.5 * (p - 1.0);
    let lhs = beta * (lambda * lambda + (beta - 3.0) * lambda.powf(beta)) / (lambda * (2.0 - lambda));
    let e = lambda - 1.0;
    let rhs = if e.abs() < 0.05 {
        // (1+e)^β = Σ C(β,k) e^k; the quotient keeps β(β−2) + 2Σ_{k≥3} C(β,k) e^{k−2}
        let mut sum = beta * (beta - 2.0);
        let mut binom = beta * (beta - 1.0) / 2.0;
        let mut pow = 1.0;
        for k in 3..200 {
            binom *= (beta - (k - 1) as f64) / k as f64;
            pow *= e;
            let term = 2.0 * binom * pow;
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum
    } else {
        (2.0 * lambda.powf(beta) - beta * lambda * lambda - 2.0 + beta) / (e * e)
    };
    lhs - rhs
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GInequalityReport {
    pub max_g: f64,
    pub argmax: f64,
    /// `g` at `λ = 1 − 10⁻⁶`.
    pub near_one: f64,
    /// The removable limit of `g` at `λ = 1`.
    pub limit_at_one: f64,
    pub n_points: usize,
}

/// Maximum of `g` on `n` uniform points of `[10⁻⁶, 1 − 10⁻⁶]`.
pub fn g_inequality_check(p: f64, n: usize) -> Result<GInequalityReport> {
    if !(p.is_finite() && p > 5.0) {
        return Err(Error::InvalidArgument(format!("the inequality is stated for p > 5, got {p}")));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two sample points".into()));
    }
    let (a, b) = (1e-6, 1.0 - 1e-6);
    let mut max_g = f64::NEG_INFINITY;
    let mut argmax = a;
    for i in 0..n {
        let l = a + (b - a) * i as f64 / (n - 1) as f64;
        let g = g_inequality(l, p);
        if g > max_g {
            max_g = g;
            argmax = l;
        }
    }
    // At λ = 1 the left side is β(β−2) and the right side tends to β(β−2).
    let beta = 0.5 * (p - 1.0);
    let limit_at_one = g_inequality(1.0, p);
    debug_assert!(limit_at_one.abs() <= 1e-12 * beta * beta);
    Ok(GInequalityReport { max_g, argmax, near_one: g_inequality(b, p), limit_at_one, n_points: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Rule, StarGraphGrid};
    use crate::profiles::{build_profile_delta, WaveParams};

    #[test]
    fn series_and_direct_agree_at_switch() {
        for p in [5.1, 7.0, 12.0] {
            let l = 0.95;
            let beta = 0.5 * (p - 1.0);
            let e: f64 = l - 1.0;
            let direct = (2.0 * l.powf(beta) - beta * l * l - 2.0 + beta) / (e * e);
            let lhs = beta * (l * l + (beta - 3.0) * l.powf(beta)) / (l * (2.0 - l));
            assert!(((lhs - direct) - g_inequality(l - 1e-13, p)).abs() < 1e-9);
            assert!(((lhs - direct) - g_inequality(l + 1e-13, p)).abs() < 1e-9);
        }
    }

    #[test]
    fn g_is_nonpositive() {
        for p in [5.1, 7.0] {
            let r = g_inequality_check(p, 2000).unwrap();
            assert!(r.max_g <= 1e-12, "{r:?}");
            assert!(r.limit_at_one.abs() < 1e-14);
        }
        assert!(g_inequality_check(5.0, 100).is_err());
    }

    fn ground(alpha: f64, p: f64) -> (DeltaModel, GraphField) {
        let w = WaveParams::ground(3, alpha, 2.0, p).unwrap();
        let g = StarGraphGrid::new(3, w.default_length(), 60001).unwrap().with_rule(Rule::Simpson).unwrap();
        (DeltaModel::new(alpha, p).unwrap(), build_profile_delta(&w, &g).unwrap())
    }

    #[test]
    fn lambda_one_of_profile() {
        let (m, phi) = ground(-1.0, 3.0);
        let l1 = lambda_one(&m, &phi, 2.0).unwrap();
        assert!((l1 - 1.0).abs() < 1e-7, "{:e}", l1 - 1.0);
        let l2 = lambda_one(&m, &phi.scaled(2.0.into()), 2.0).unwrap();
        assert!((l2 - 0.5).abs() < 1e-7);
        assert!(lambda_one(&m, &GraphField::zeros(*phi.grid()), 2.0).is_err());
    }

    #[test]
    fn lambda_zero_inverts_scaling() {
        let (_, phi) = ground(-1.0, 6.0);
        assert!((lambda_zero(&phi, &phi, 6.0).unwrap() - 1.0).abs() < 1e-12);
        let v = phi.scale(1.2).unwrap();
        assert!((lambda_zero(&v, &phi, 6.0).unwrap() - 1.0 / 1.2).abs() < 1e-6);
        let small = phi.scale(0.8).unwrap();
        assert!(matches!(lambda_zero(&small, &phi, 6.0), Err(Error::Precondition(_))));
    }
}
