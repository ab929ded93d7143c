//! Standing waves, variational functionals and time integration for the
//! nonlinear Schrödinger equation with point interactions.
//!
//! Two settings are covered:
//!
//! * a star graph of `N` half-lines joined at a δ vertex of strength `α`,
//!   `i∂ₜu = −Δu − |u|^{p−1}u` with continuity and `Σ u_j′(0) = α u(0)`;
//! * the real line with a δ′ interaction of strength `γ`, where `u′` is
//!   continuous at the origin and `u(0+) − u(0−) = −γ u′(0)`.
//!
//! Fields are sampled on truncated half-lines ([`grid`]), profiles come from
//! closed forms ([`profiles`]), [`functionals`] evaluates energies and the
//! variational quantities, and [`evolution`] integrates the flow.

pub mod error;
pub mod evolution;
pub mod functionals;
pub mod grid;
pub mod numerics;
pub mod profiles;
pub mod snapshot;

pub use error::{Error, Result};
pub use grid::{EdgeSamples, GraphField, LineField, Rule, StarGraphGrid};
pub use profiles::{
    build_half_soliton, build_profile_delta, build_profile_delta_prime, delta_prime_residuals,
    delta_residuals, scale_field, solve_t1_t2, Branch, DeltaPrimeParams, GridPolicy, ProfileResiduals,
    Scalable, WaveParams,
};
