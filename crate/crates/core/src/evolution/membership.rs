//! Membership in the blow-up sets
//! `B⁺ = {S_ω(V) < d_eq(ω), P(V) < 0}` and
//! `B⁻ = B⁺ ∩ {‖V‖₂ ≤ ‖Φ‖₂, ‖V‖_{p+1} > ‖Φ‖_{p+1}}`.

use crate::error::{Error, Result};
use crate::functionals::{dc_ground_level, DeltaModel, Norms};
use crate::grid::{GraphField, StarGraphGrid};
use crate::profiles::{build_profile_delta_with, GridPolicy, WaveParams};

/// Relative slack allowed in `‖V‖₂ ≤ ‖Φ‖₂`.
///
/// λ-scaled data satisfy it with equality, so the sampled masses only agree to
/// the trapezoid error of the resampled data, which is `O(h²)`.
pub const MASS_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowupSet {
    Plus,
    Minus,
}

/// Ground-state quantities the set conditions compare against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipReference {
    pub model: DeltaModel,
    pub omega: f64,
    pub d_eq: f64,
    /// `‖Φ‖₂²` sampled on the evolution grid.
    pub profile_mass: f64,
    /// `‖Φ‖_{p+1}^{p+1}` sampled on the evolution grid.
    pub profile_power: f64,
    /// Margin below which `S_ω < d_eq` and `P < 0` count as undecided: the
    /// larger of `|S_ω(Φ) − d_eq|` and `|P(Φ)|` for the sampled profile, i.e.
    /// the discretization error of those functionals on this grid.
    pub margin: f64,
}

impl MembershipReference {
    pub fn new(params: &WaveParams, grid: &StarGraphGrid) -> Result<Self> {
        if params.k != 0 {
            return Err(Error::InvalidArgument("blow-up sets are defined from the k = 0 profile".into()));
        }
        let phi = build_profile_delta_with(params, &grid.with_edges(params.n_edges), GridPolicy::Lenient)?;
        let model = DeltaModel::new(params.alpha, params.p)?;
        let n = model.norms(&phi);
        let d_eq = dc_ground_level(params)?;
        let margin = (model.action_from(&n, params.omega) - d_eq).abs().max(model.virial_from(&n).abs());
        Ok(Self { model, omega: params.omega, d_eq, profile_mass: n.mass, profile_power: n.power, margin })
    }
}

/// Per-condition results with their slacks (positive slack = condition holds;
/// the two strict conditions also need the slack to exceed the reference margin).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipReport {
    /// `d_eq − S_ω(V)`
    pub action_gap: f64,
    /// `−P(V)`
    pub virial_gap: f64,
    /// `‖Φ‖₂² − ‖V‖₂²`
    pub mass_gap: f64,
    /// `‖V‖_{p+1}^{p+1} − ‖Φ‖_{p+1}^{p+1}`
    pub power_gap: f64,
    pub below_ground: bool,
    pub negative_virial: bool,
    pub mass_ok: bool,
    pub power_ok: bool,
    pub member: bool,
}

pub fn membership_from_norms(n: &Norms, r: &MembershipReference, set: BlowupSet) -> MembershipReport {
    let action_gap = r.d_eq - r.model.action_from(n, r.omega);
    let virial_gap = -r.model.virial_from(n);
    let mass_gap = r.profile_mass - n.mass;
    let power_gap = n.power - r.profile_power;
    let below_ground = action_gap > r.margin;
    let negative_virial = virial_gap > r.margin;
    let mass_ok = mass_gap >= -MASS_TOLERANCE * r.profile_mass;
    let power_ok = power_gap > 0.0;
    let member = below_ground
        && negative_virial
        && match set {
            BlowupSet::Plus => true,
            BlowupSet::Minus => mass_ok && power_ok,
        };
    MembershipReport { action_gap, virial_gap, mass_gap, power_gap, below_ground, negative_virial, mass_ok, power_ok, member }
}

pub fn set_membership(v: &GraphField, r: &MembershipReference, set: BlowupSet) -> MembershipReport {
    membership_from_norms(&r.model.norms(v), r, set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{build_profile_delta, Scalable};

    #[test]
    fn scaled_profile_enters_the_sets() {
        let w = WaveParams::ground(3, 1.0, 2.0, 6.0).unwrap();
        let g = StarGraphGrid::with_spacing(3, w.default_length(), 0.01).unwrap();
        let phi = build_profile_delta(&w, &g).unwrap();
        let r = MembershipReference::new(&w, &g).unwrap();
        let m = set_membership(&phi.scale(1.2).unwrap(), &r, BlowupSet::Plus);
        assert!(m.member, "{m:?}");
        let at = set_membership(&phi, &r, BlowupSet::Plus);
        assert!(!at.member, "{at:?}");
    }

    #[test]
    fn attractive_scaled_profile_in_minus_set() {
        let p = 6.0;
        let xi = crate::functionals::instability_threshold(
            p,
            crate::functionals::ThresholdMode::DeltaGraph { alpha: -1.0, n_edges: 3 },
        )
        .unwrap();
        let w = WaveParams::ground(3, -1.0, 1.5 * xi.omega_star, p).unwrap();
        let g = StarGraphGrid::with_spacing(3, w.default_length(), 0.01 / w.omega.sqrt()).unwrap();
        let phi = build_profile_delta(&w, &g).unwrap();
        let r = MembershipReference::new(&w, &g).unwrap();
        let m = set_membership(&phi.scale(1.2).unwrap(), &r, BlowupSet::Minus);
        assert!(m.member, "{m:?}");
    }
}
