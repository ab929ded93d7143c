//! Conserved quantities, action-type functionals, closed-form identities and
//! instability thresholds.
//!
//! For the δ star graph with power `p`:
//!
//! * `E(V) = ½‖V′‖² + (α/2)|v(0)|² − ‖V‖_{p+1}^{p+1}/(p+1)`
//! * `S_ω(V) = E(V) + (ω/2)‖V‖²`
//! * `I_ω(V) = ‖V′‖² + ω‖V‖² − ‖V‖_{p+1}^{p+1} + α|v(0)|²`
//! * `P(V) = ‖V′‖² + (α/2)|v(0)|² − ((p−1)/(2(p+1)))‖V‖_{p+1}^{p+1}`
//!
//! The δ′ line versions replace `α|v(0)|²` by `−|v(0+) − v(0−)|²/γ`.

mod closed;
mod delta_prime;
mod scaling;
mod threshold;

pub use closed::{
    dc_ground_level, profile_lp_norm_closed, second_variation_closed, second_variation_E,
    vertex_abs2_closed, SecondVariation,
};
pub use delta_prime::{
    delta_prime_instability_condition, delta_prime_lp_norm_closed, estimate_omega2, jump_sq_closed,
    Omega2Estimate,
};
pub use scaling::{g_inequality, g_inequality_check, lambda_one, lambda_zero, GInequalityReport};
pub use threshold::{
    instability_threshold, threshold_function, threshold_function_derivative, ThresholdMode,
    ThresholdResult,
};

use crate::error::{Error, Result};
use crate::grid::{GraphField, LineField};

/// Values of the conserved and variational functionals for one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalReport {
    pub mass: f64,
    pub energy: f64,
    pub action: f64,
    pub nehari: f64,
    pub virial_p: f64,
    /// `|v(0)|²` on the graph, `|v(0+) − v(0−)|²` on the line.
    pub vertex_abs2: f64,
}

/// The norms every functional is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    /// `‖V′‖₂²`
    pub kinetic: f64,
    /// `‖V‖₂²`
    pub mass: f64,
    /// `‖V‖_{p+1}^{p+1}`
    pub power: f64,
    /// Vertex term before its coupling constant.
    pub vertex_abs2: f64,
}

fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("power p must exceed 1, got {p}")))
    }
}

impl Norms {
    pub fn graph(v: &GraphField, p: f64) -> Self {
        let s = v.samples();
        Self { kinetic: s.kinetic(), mass: s.lq_power(2.0), power: s.lq_power(p + 1.0), vertex_abs2: v.vertex().norm_sqr() }
    }

    pub fn line(v: &LineField, p: f64) -> Self {
        let s = v.samples();
        Self { kinetic: s.kinetic(), mass: s.lq_power(2.0), power: s.lq_power(p + 1.0), vertex_abs2: v.jump().norm_sqr() }
    }
}

/// `((p−1)/(2(p+1)))`, the weight of `‖V‖_{p+1}^{p+1}` in `P` and in the ground level.
pub fn power_weight(p: f64) -> f64 {
    (p - 1.0) / (2.0 * (p + 1.0))
}

/// `∂²_λ E(V^λ)|_{λ=1} = ‖V′‖² − ((p−1)(p−3)/(4(p+1)))‖V‖_{p+1}^{p+1}`.
///
/// The vertex term is linear in `λ` and drops out.
pub fn second_variation_from_norms(kinetic: f64, power: f64, p: f64) -> f64 {
    kinetic - (p - 1.0) * (p - 3.0) / (4.0 * (p + 1.0)) * power
}

/// NLS with a δ vertex of strength `alpha` and nonlinearity `|u|^{p−1}u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaModel {
    pub alpha: f64,
    pub p: f64,
}

impl DeltaModel {
    pub fn new(alpha: f64, p: f64) -> Result<Self> {
        check_p(p)?;
        if !alpha.is_finite() {
            return Err(Error::InvalidArgument("alpha must be finite".into()));
        }
        Ok(Self { alpha, p })
    }

    pub fn norms(&self, v: &GraphField) -> Norms {
        Norms::graph(v, self.p)
    }

    pub fn energy(&self, v: &GraphField) -> f64 {
        self.energy_from(&self.norms(v))
    }

    pub fn action(&self, v: &GraphField, omega: f64) -> f64 {
        self.action_from(&self.norms(v), omega)
    }

    pub fn nehari(&self, v: &GraphField, omega: f64) -> f64 {
        self.nehari_from(&self.norms(v), omega)
    }

    pub fn virial(&self, v: &GraphField) -> f64 {
        self.virial_from(&self.norms(v))
    }

    pub fn report(&self, v: &GraphField, omega: f64) -> FunctionalReport {
        self.report_from(&self.norms(v), omega)
    }

    pub fn energy_from(&self, n: &Norms) -> f64 {
        0.5 * n.kinetic + 0.5 * self.alpha * n.vertex_abs2 - n.power / (self.p + 1.0)
    }

    pub fn action_from(&self, n: &Norms, omega: f64) -> f64 {
        self.energy_from(n) + 0.5 * omega * n.mass
    }

    pub fn nehari_from(&self, n: &Norms, omega: f64) -> f64 {
        n.kinetic + omega * n.mass - n.power + self.alpha * n.vertex_abs2
    }

    pub fn virial_from(&self, n: &Norms) -> f64 {
        n.kinetic + 0.5 * self.alpha * n.vertex_abs2 - power_weight(self.p) * n.power
    }

    pub fn report_from(&self, n: &Norms, omega: f64) -> FunctionalReport {
        FunctionalReport {
            mass: n.mass,
            energy: self.energy_from(n),
            action: self.action_from(n, omega),
            nehari: self.nehari_from(n, omega),
            virial_p: self.virial_from(n),
            vertex_abs2: n.vertex_abs2,
        }
    }
}

/// NLS on the line with a δ′ interaction of strength `gamma > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaPrimeModel {
    pub gamma: f64,
    pub p: f64,
}

impl DeltaPrimeModel {
    pub fn new(gamma: f64, p: f64) -> Result<Self> {
        check_p(p)?;
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidArgument(format!("γ must be positive, got {gamma}")));
        }
        Ok(Self { gamma, p })
    }

    pub fn norms(&self, v: &LineField) -> Norms {
        Norms::line(v, self.p)
    }

    pub fn energy_from(&self, n: &Norms) -> f64 {
        0.5 * n.kinetic - n.vertex_abs2 / (2.0 * self.gamma) - n.power / (self.p + 1.0)
    }

    pub fn action_from(&self, n: &Norms, omega: f64) -> f64 {
        self.energy_from(n) + 0.5 * omega * n.mass
    }

    pub fn nehari_from(&self, n: &Norms, omega: f64) -> f64 {
        n.kinetic + omega * n.mass - n.power - n.vertex_abs2 / self.gamma
    }

    pub fn virial_from(&self, n: &Norms) -> f64 {
        n.kinetic - n.vertex_abs2 / (2.0 * self.gamma) - power_weight(self.p) * n.power
    }

    pub fn report_from(&self, n: &Norms, omega: f64) -> FunctionalReport {
        FunctionalReport {
            mass: n.mass,
            energy: self.energy_from(n),
            action: self.action_from(n, omega),
            nehari: self.nehari_from(n, omega),
            virial_p: self.virial_from(n),
            vertex_abs2: n.vertex_abs2,
        }
    }

    pub fn report(&self, v: &LineField, omega: f64) -> FunctionalReport {
        self.report_from(&self.norms(v), omega)
    }
}

/// All four δ′ functionals of `v`.
pub fn delta_prime_functionals(v: &LineField, gamma: f64, omega: f64, p: f64) -> Result<FunctionalReport> {
    Ok(DeltaPrimeModel::new(gamma, p)?.report(v, omega))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::StarGraphGrid;
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn zero_field_is_zero() {
        let g = StarGraphGrid::new(3, 10.0, 101).unwrap();
        let r = DeltaModel::new(-1.0, 3.0).unwrap().report(&GraphField::zeros(g), 2.0);
        assert_eq!(r, FunctionalReport { mass: 0.0, energy: 0.0, action: 0.0, nehari: 0.0, virial_p: 0.0, vertex_abs2: 0.0 });
        let line = LineField::zeros(g);
        let r = delta_prime_functionals(&line, 2.0, 5.0, 6.0).unwrap();
        assert_eq!((r.energy, r.action, r.nehari, r.virial_p), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn constant_energy() {
        let c = 1.3;
        let g = StarGraphGrid::new(1, 1.0, 11).unwrap();
        let v = GraphField::constant(g, Complex64::new(c, 0.0));
        let e = DeltaModel::new(0.0, 3.0).unwrap().energy(&v);
        assert!((e + c.powi(4) / 4.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(DeltaModel::new(1.0, 1.0).is_err());
        assert!(DeltaPrimeModel::new(0.0, 3.0).is_err());
        assert!(DeltaPrimeModel::new(-1.0, 3.0).is_err());
    }

    proptest! {
        #[test]
        fn action_splits_into_nehari_and_power(
            alpha in -3.0f64..3.0,
            omega in 0.1f64..5.0,
            p in 1.5f64..9.0,
            a in -2.0f64..2.0,
            b in 0.2f64..3.0,
            k in -3.0f64..3.0,
        ) {
            let g = StarGraphGrid::new(3, 12.0, 241).unwrap();
            let v = GraphField::from_fn(g, |j, x| {
                Complex64::new(a * (-(b + j as f64 * 0.1) * x).exp(), (k * x).sin() * (-x).exp())
            }).unwrap();
            let m = DeltaModel::new(alpha, p).unwrap();
            let r = m.report(&v, omega);
            let n = m.norms(&v);
            let rhs = 0.5 * r.nehari + power_weight(p) * n.power;
            let scale = 1.0 + r.action.abs() + n.power + n.kinetic + omega * n.mass;
            prop_assert!((r.action - rhs).abs() <= 1e-13 * scale);
            prop_assert!((r.action - r.energy - 0.5 * omega * r.mass).abs() <= 1e-13 * scale);
        }

        #[test]
        fn line_action_splits_into_nehari_and_power(
            gamma in 0.1f64..4.0,
            omega in 0.1f64..5.0,
            p in 1.5f64..9.0,
            a in -2.0f64..2.0,
            c in -2.0f64..2.0,
        ) {
            let g = StarGraphGrid::new(2, 12.0, 241).unwrap();
            let v = LineField::from_sides(g, |s| Complex64::new(a * (-s).exp(), 0.0), |s| Complex64::new(c * (-2.0 * s).exp(), 0.3 * s * (-s).exp()));
            let m = DeltaPrimeModel::new(gamma, p).unwrap();
            let n = m.norms(&v);
            let r = m.report_from(&n, omega);
            let rhs = 0.5 * r.nehari + power_weight(p) * n.power;
            let scale = 1.0 + n.power + n.kinetic + omega * n.mass + n.vertex_abs2 / gamma;
            prop_assert!((r.action - rhs).abs() <= 1e-13 * scale);
        }
    }
}
