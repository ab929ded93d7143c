//! Closed-form standing-wave profiles and the mass-preserving λ-scaling.
//!
//! Every profile here is a shifted `sech^{2/(p−1)}` bump,
//! `[((p+1)ω/2)·sech²(κx + b)]^{1/(p−1)}` with `κ = (p−1)√ω/2`, sampled
//! directly from the formula.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{EdgeSamples, GraphField, LineField, StarGraphGrid};
use crate::numerics::{bisect, sech, CubicSpline};

/// Finest profile feature must be resolved by at least this many points per
/// decay length `1/√ω`.
const MAX_SPACING_PER_WIDTH: f64 = 0.05;
/// Largest profile value tolerated at the truncation point.
const MAX_TAIL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridPolicy {
    /// Reject grids that do not resolve the profile.
    #[default]
    Strict,
    /// Log a warning and sample anyway.
    Lenient,
}

/// Shape data shared by all profiles.
#[derive(Debug, Clone, Copy)]
struct Bump {
    amplitude: f64,
    kappa: f64,
    exponent: f64,
}

impl Bump {
    fn new(omega: f64, p: f64) -> Self {
        Self {
            amplitude: ((p + 1.0) * omega / 2.0).powf(1.0 / (p - 1.0)),
            kappa: (p - 1.0) * omega.sqrt() / 2.0,
            exponent: 2.0 / (p - 1.0),
        }
    }

    #[inline]
    fn at(&self, x: f64, shift: f64) -> f64 {
        self.amplitude * sech(self.kappa * x + shift).powf(self.exponent)
    }
}

fn check_p_omega(p: f64, omega: f64) -> Result<()> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::InvalidArgument(format!("power p must exceed 1, got {p}")));
    }
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::Existence(format!("frequency must be positive, got {omega}")));
    }
    Ok(())
}

fn check_resolution(
    grid: &StarGraphGrid,
    omega: f64,
    tail: f64,
    policy: GridPolicy,
) -> Result<()> {
    let width = 1.0 / omega.sqrt();
    let mut problems = Vec::new();
    if grid.h() > MAX_SPACING_PER_WIDTH * width {
        problems.push(format!(
            "h = {:.3e} exceeds {MAX_SPACING_PER_WIDTH}·width = {:.3e}",
            grid.h(),
            MAX_SPACING_PER_WIDTH * width
        ));
    }
    if tail > MAX_TAIL {
        problems.push(format!("profile tail {tail:.3e} at L = {} exceeds {MAX_TAIL:e}", grid.length()));
    }
    if problems.is_empty() {
        return Ok(());
    }
    let msg = problems.join("; ");
    match policy {
        GridPolicy::Strict => Err(Error::GridTooCoarse(msg)),
        GridPolicy::Lenient => {
            log::warn!("profile under-resolved: {msg}");
            Ok(())
        }
    }
}

/// Parameters of the δ-interaction standing wave `Φ_k^α` on a star graph with `N` edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveParams {
    pub n_edges: usize,
    pub alpha: f64,
    pub omega: f64,
    pub p: f64,
    pub k: usize,
}

impl WaveParams {
    pub fn new(n_edges: usize, alpha: f64, omega: f64, p: f64, k: usize) -> Result<Self> {
        let w = Self { n_edges, alpha, omega, p, k };
        w.validate()?;
        Ok(w)
    }

    /// The edge-symmetric profile `Φ_0^α`.
    pub fn ground(n_edges: usize, alpha: f64, omega: f64, p: f64) -> Result<Self> {
        Self::new(n_edges, alpha, omega, p, 0)
    }

    pub fn validate(&self) -> Result<()> {
        check_p_omega(self.p, self.omega)?;
        if self.n_edges < 2 {
            return Err(Error::InvalidArgument(format!("need N >= 2 edges, got {}", self.n_edges)));
        }
        if !self.alpha.is_finite() {
            return Err(Error::InvalidArgument("alpha must be finite".into()));
        }
        // 2k < N, i.e. k <= floor((N-1)/2)
        if 2 * self.k >= self.n_edges {
            return Err(Error::InvalidArgument(format!(
                "k = {} must satisfy 2k < N = {}",
                self.k, self.n_edges
            )));
        }
        let d = (self.n_edges - 2 * self.k) as f64;
        let bound = self.alpha * self.alpha / (d * d);
        if self.omega <= bound {
            return Err(Error::Existence(format!(
                "ω = {} must exceed α²/(N−2k)² = {bound}",
                self.omega
            )));
        }
        Ok(())
    }

    /// `a_k = tanh⁻¹(α/((2k−N)√ω))`.
    pub fn shift(&self) -> f64 {
        let d = 2.0 * self.k as f64 - self.n_edges as f64;
        (self.alpha / (d * self.omega.sqrt())).atanh()
    }

    /// `ξ = −α/(N√ω)`; equals `tanh(a_0)`.
    pub fn xi(&self) -> f64 {
        -self.alpha / (self.n_edges as f64 * self.omega.sqrt())
    }

    /// Decay rate `κ = (p−1)√ω/2` of `sech²(κx ± a)`.
    pub fn kappa(&self) -> f64 {
        (self.p - 1.0) * self.omega.sqrt() / 2.0
    }

    /// Signed shift inside `sech²(κx + b)` on edge `j` (0-based).
    pub fn edge_shift(&self, j: usize) -> f64 {
        if j < self.k {
            -self.shift()
        } else {
            self.shift()
        }
    }

    /// `φ_{k,j}(x)`.
    pub fn value(&self, j: usize, x: f64) -> f64 {
        Bump::new(self.omega, self.p).at(x, self.edge_shift(j))
    }

    /// Edge length that puts the truncation ≈ 40 decay lengths past the
    /// furthest bump maximum.
    pub fn default_length(&self) -> f64 {
        let peak = (self.shift().abs() / self.kappa()).max(0.0);
        peak + 40.0 / self.omega.sqrt()
    }

    fn tail(&self, length: f64) -> f64 {
        (0..self.n_edges).map(|j| self.value(j, length)).fold(0.0, f64::max)
    }
}

/// Sample `Φ_k^α` on `grid` (edges `1…k` carry `−a_k`, the rest `+a_k`).
pub fn build_profile_delta(params: &WaveParams, grid: &StarGraphGrid) -> Result<GraphField> {
    build_profile_delta_with(params, grid, GridPolicy::Strict)
}

pub fn build_profile_delta_with(
    params: &WaveParams,
    grid: &StarGraphGrid,
    policy: GridPolicy,
) -> Result<GraphField> {
    params.validate()?;
    if grid.n_edges() != params.n_edges {
        return Err(Error::InvalidGrid(format!(
            "grid has {} edges, profile needs {}",
            grid.n_edges(),
            params.n_edges
        )));
    }
    check_resolution(grid, params.omega, params.tail(grid.length()), policy)?;
    let bump = Bump::new(params.omega, params.p);
    let shift = params.shift();
    // The vertex value is the same closed-form number on every edge because
    // sech is even; take it from edge k so it is bit-identical.
    let vertex = bump.at(0.0, shift);
    let samples = EdgeSamples::from_fn(*grid, |j, x| {
        if x == 0.0 {
            return Complex64::new(vertex, 0.0);
        }
        let b = if j < params.k { -shift } else { shift };
        Complex64::new(bump.at(x, b), 0.0)
    });
    GraphField::from_samples(samples)
}

/// Even line profile `φ_ω(x) = [((p+1)ω/2) sech²(κ|x| − tanh⁻¹(α/(N√ω)))]^{1/(p−1)}`.
pub fn build_half_soliton(
    alpha: f64,
    omega: f64,
    p: f64,
    n_edges: usize,
    grid: &StarGraphGrid,
) -> Result<LineField> {
    let params = WaveParams::ground(n_edges, alpha, omega, p)?;
    check_resolution(grid, omega, params.tail(grid.length()), GridPolicy::Strict)?;
    let bump = Bump::new(omega, p);
    let b = -(alpha / (n_edges as f64 * omega.sqrt())).atanh();
    let f = |s: f64| Complex64::new(bump.at(s, b), 0.0);
    Ok(LineField::from_sides(*grid, f, f))
}

/// Roots `0 < t₁ < t₂ < 1` of
/// `t₁^{p−1} − t₁^{p+1} = t₂^{p−1} − t₂^{p+1}`, `t₁⁻¹ + t₂⁻¹ = γ√ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymmetricRoots {
    pub t1: f64,
    pub t2: f64,
    /// `1 − t₂`, carried separately because `t₂` rounds to 1 for large ω.
    pub one_minus_t2: f64,
    /// `|G(t₁) − G(t₂)|` with `G(t) = t^{p−1}(1 − t²)`.
    pub residual_power: f64,
    /// `|t₁⁻¹ + t₂⁻¹ − γ√ω|`.
    pub residual_sum: f64,
}

impl AsymmetricRoots {
    /// `tanh⁻¹(t₂)` without cancellation.
    pub fn atanh_t2(&self) -> f64 {
        let u = self.one_minus_t2;
        0.5 * ((2.0 - u) / u).ln()
    }

    /// `1 − t₂²`.
    pub fn one_minus_t2_sq(&self) -> f64 {
        self.one_minus_t2 * (2.0 - self.one_minus_t2)
    }
}

fn power_map(t: f64, one_minus_t: f64, p: f64) -> f64 {
    // t^{p−1}(1 − t)(1 + t)
    t.powf(p - 1.0) * one_minus_t * (1.0 + t)
}

/// Existence threshold `(4/γ²)(p+1)/(p−1)` of the asymmetric δ′ profiles.
pub fn asymmetric_threshold(gamma: f64, p: f64) -> f64 {
    4.0 / (gamma * gamma) * (p + 1.0) / (p - 1.0)
}

/// Solve the `(t₁, t₂)` system for the asymmetric δ′ profile.
///
/// The second equation gives `t₁ = 1/(γ√ω − 1/t₂)`, leaving a scalar equation in
/// `u = 1 − t₂` on `(0, 1 − 2/(γ√ω))`; the upper end is the symmetric solution
/// `t₁ = t₂ = 2/(γ√ω)`, approached from the side where the equation is negative.
pub fn solve_t1_t2(gamma: f64, omega: f64, p: f64) -> Result<AsymmetricRoots> {
    check_p_omega(p, omega)?;
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("γ must be positive, got {gamma}")));
    }
    let threshold = asymmetric_threshold(gamma, p);
    if omega <= threshold {
        return Err(Error::Existence(format!(
            "asymmetric profile needs ω > (4/γ²)(p+1)/(p−1) = {threshold}, got ω = {omega}"
        )));
    }
    let c = gamma * omega.sqrt();
    let t1_of = |u: f64| 1.0 / (c - 1.0 / (1.0 - u));
    let residual = |u: f64| {
        let t1 = t1_of(u);
        power_map(t1, 1.0 - t1, p) - power_map(1.0 - u, u, p)
    };
    let u_max = 1.0 - 2.0 / c;
    // Walk towards the symmetric end until the reduced equation turns negative.
    let mut hi = None;
    for k in 1..=15 {
        let u = u_max * (1.0 - 10f64.powi(-k));
        if residual(u) < 0.0 {
            hi = Some(u);
            break;
        }
    }
    let hi = hi.ok_or_else(|| {
        Error::NoRoot(format!(
            "no asymmetric root bracketed for γ = {gamma}, ω = {omega}, p = {p} (too close to threshold {threshold})"
        ))
    })?;
    let root = bisect(residual, 0.0, hi, 0.0)?;
    let u = root.root;
    let t1 = t1_of(u);
    let t2 = 1.0 - u;
    if !(t1 > 0.0 && t1 < t2 && u > 0.0) {
        return Err(Error::NoRoot(format!("degenerate roots t1 = {t1}, t2 = {t2}")));
    }
    Ok(AsymmetricRoots {
        t1,
        t2,
        one_minus_t2: u,
        residual_power: (power_map(t1, 1.0 - t1, p) - power_map(t2, u, p)).abs(),
        residual_sum: (1.0 / t1 + 1.0 / t2 - c).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Odd,
    Asymmetric,
    /// Asymmetric profile with `y₁` and `y₂` exchanged.
    AsymmetricSwapped,
}

impl std::str::FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "odd" => Ok(Branch::Odd),
            "asymmetric" | "as" => Ok(Branch::Asymmetric),
            "asymmetric_swapped" | "swapped" => Ok(Branch::AsymmetricSwapped),
            other => Err(Error::InvalidArgument(format!("unknown branch '{other}'"))),
        }
    }
}

/// A δ′ standing wave on the line with its derived shifts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaPrimeParams {
    pub gamma: f64,
    pub omega: f64,
    pub p: f64,
    pub branch: Branch,
    /// Present for the asymmetric branches.
    pub roots: Option<AsymmetricRoots>,
}

impl DeltaPrimeParams {
    pub fn new(gamma: f64, omega: f64, p: f64, branch: Branch) -> Result<Self> {
        check_p_omega(p, omega)?;
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidArgument(format!("γ must be positive, got {gamma}")));
        }
        let roots = match branch {
            Branch::Odd => {
                let bound = 4.0 / (gamma * gamma);
                if omega <= bound {
                    return Err(Error::Existence(format!(
                        "odd profile needs ω > 4/γ² = {bound}, got {omega}"
                    )));
                }
                None
            }
            Branch::Asymmetric | Branch::AsymmetricSwapped => Some(solve_t1_t2(gamma, omega, p)?),
        };
        Ok(Self { gamma, omega, p, branch, roots })
    }

    fn scale_y(&self) -> f64 {
        2.0 / ((self.p - 1.0) * self.omega.sqrt())
    }

    /// `y₀ = (2/((p−1)√ω))·tanh⁻¹(2/(γ√ω))`.
    pub fn y0(&self) -> f64 {
        self.scale_y() * (2.0 / (self.gamma * self.omega.sqrt())).atanh()
    }

    /// `(y₁, y₂)`; `None` on the odd branch.
    pub fn y12(&self) -> Option<(f64, f64)> {
        self.roots.map(|r| (self.scale_y() * r.t1.atanh(), self.scale_y() * r.atanh_t2()))
    }

    /// Signed shifts `(b₊, b₋)` with `right(s) = ±bump(κs + b₊)`, `left(s) = −bump(κs + b₋)`.
    fn side_shifts(&self) -> (f64, f64) {
        match (self.branch, self.roots) {
            (Branch::Odd, _) => {
                let b = (2.0 / (self.gamma * self.omega.sqrt())).atanh();
                (b, b)
            }
            (Branch::Asymmetric, Some(r)) => (r.t1.atanh(), r.atanh_t2()),
            (Branch::AsymmetricSwapped, Some(r)) => (r.atanh_t2(), r.t1.atanh()),
            _ => unreachable!("asymmetric branch always carries roots"),
        }
    }

    /// `φ(x)` for `x ≠ 0`.
    pub fn value(&self, x: f64) -> f64 {
        let bump = Bump::new(self.omega, self.p);
        let (bp, bm) = self.side_shifts();
        if x > 0.0 {
            bump.at(x, bp)
        } else {
            -bump.at(-x, bm)
        }
    }

    /// Truncation length placing both tails 40 decay lengths out.
    pub fn default_length(&self) -> f64 {
        40.0 / self.omega.sqrt()
    }
}

/// Sample a δ′ profile on the split line.
pub fn build_profile_delta_prime(params: &DeltaPrimeParams, grid: &StarGraphGrid) -> Result<LineField> {
    build_profile_delta_prime_with(params, grid, GridPolicy::Strict)
}

pub fn build_profile_delta_prime_with(
    params: &DeltaPrimeParams,
    grid: &StarGraphGrid,
    policy: GridPolicy,
) -> Result<LineField> {
    let bump = Bump::new(params.omega, params.p);
    let (bp, bm) = params.side_shifts();
    let tail = bump.at(grid.length(), bp).max(bump.at(grid.length(), bm));
    check_resolution(grid, params.omega, tail, policy)?;
    Ok(LineField::from_sides(
        *grid,
        |s| Complex64::new(bump.at(s, bp), 0.0),
        |s| Complex64::new(-bump.at(s, bm), 0.0),
    ))
}

/// Sup-norm residuals of a sampled profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileResiduals {
    /// `sup |−φ″ + ωφ − |φ|^{p−1}φ|` over interior samples, with the
    /// three-point second difference.
    pub stationary: f64,
    /// δ: spread of the closed-form edge traces at the vertex.
    /// δ′: `|φ′(0+) − φ′(0−)|`.
    pub continuity: f64,
    /// δ: `|Σ_j φ_j′(0) − αφ(0)|`; δ′: `|φ(0+) − φ(0−) + γφ′(0)|`.
    /// One-sided three-point derivatives.
    pub vertex: f64,
}

impl ProfileResiduals {
    pub fn max(&self) -> f64 {
        self.stationary.max(self.continuity).max(self.vertex)
    }
}

fn stationary_residual(samples: &EdgeSamples, omega: f64, p: f64) -> f64 {
    let g = samples.grid();
    let h2 = g.h() * g.h();
    let mut worst = 0.0f64;
    for j in 0..g.n_edges() {
        let u = samples.edge(j);
        for i in 1..u.len().saturating_sub(1) {
            let d2 = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2;
            let r = -d2 + omega * u[i] - u[i].norm().powf(p - 1.0) * u[i];
            worst = worst.max(r.norm());
        }
    }
    worst
}

/// Residuals of a sampled `Φ_k^α` (usually from [`build_profile_delta`]).
pub fn delta_residuals(params: &WaveParams, phi: &GraphField) -> ProfileResiduals {
    let d = phi.derivative();
    let flux: Complex64 = (0..params.n_edges).map(|j| d.edge(j)[0]).sum();
    let v0 = params.value(0, 0.0);
    let continuity = (1..params.n_edges).map(|j| (params.value(j, 0.0) - v0).abs()).fold(0.0, f64::max);
    ProfileResiduals {
        stationary: stationary_residual(phi.samples(), params.omega, params.p),
        continuity,
        vertex: (flux - params.alpha * phi.vertex()).norm(),
    }
}

/// Residuals of a sampled δ′ profile.
pub fn delta_prime_residuals(params: &DeltaPrimeParams, phi: &LineField) -> ProfileResiduals {
    let (dm, dp) = phi.one_sided_derivatives();
    ProfileResiduals {
        stationary: stationary_residual(phi.samples(), params.omega, params.p),
        continuity: (dp - dm).norm(),
        vertex: (phi.jump() + params.gamma * 0.5 * (dp + dm)).norm(),
    }
}

/// `V^λ(x) = λ^{1/2} V(λx)`, resampled on the same grid by a cubic spline per
/// edge; points with `λx` past the truncation length are set to zero.
pub trait Scalable: Sized {
    fn scale(&self, lambda: f64) -> Result<Self>;
}

fn scale_samples(samples: &EdgeSamples, lambda: f64) -> Result<EdgeSamples> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("scaling factor must be positive, got {lambda}")));
    }
    let grid = *samples.grid();
    if grid.n_points() < 5 {
        return Err(Error::InvalidGrid("λ-scaling needs at least 5 samples per edge".into()));
    }
    if lambda == 1.0 {
        return Ok(samples.clone());
    }
    let amp = lambda.sqrt();
    let mut out = EdgeSamples::zeros(grid);
    for j in 0..grid.n_edges() {
        let spline = CubicSpline::new(samples.edge(j), grid.h());
        let dst = out.edge_mut(j);
        for (i, v) in dst.iter_mut().enumerate() {
            let x = lambda * grid.x(i);
            *v = spline.eval(x).map_or(Complex64::new(0.0, 0.0), |s| amp * s);
        }
    }
    Ok(out)
}

impl Scalable for GraphField {
    fn scale(&self, lambda: f64) -> Result<Self> {
        GraphField::from_samples(scale_samples(self.samples(), lambda)?)
    }
}

impl Scalable for LineField {
    fn scale(&self, lambda: f64) -> Result<Self> {
        LineField::from_samples(scale_samples(self.samples(), lambda)?)
    }
}

pub fn scale_field<F: Scalable>(field: &F, lambda: f64) -> Result<F> {
    field.scale(lambda)
}
