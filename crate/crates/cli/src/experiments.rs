//! Experiment drivers. Each takes a resolved [`ExperimentSpec`], checks the
//! parameter regime, runs, and returns a report that renders as a CSV table.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use graphnls::evolution::{
    evolve_delta_prime, evolve_with, set_membership, BlowupReason, BlowupSet, EvolutionConfig, MembershipReference,
    MembershipReport, TrajectoryRecord,
};
use graphnls::functionals::{
    dc_ground_level, estimate_omega2, instability_threshold, power_weight, profile_lp_norm_closed,
    second_variation_closed, second_variation_from_norms, vertex_abs2_closed, DeltaModel, DeltaPrimeModel,
    Omega2Estimate, ThresholdMode,
};
use graphnls::profiles::{build_profile_delta_prime_with, build_profile_delta_with};
use graphnls::{
    build_profile_delta, build_profile_delta_prime, delta_prime_residuals, delta_residuals, solve_t1_t2, Branch,
    DeltaPrimeParams, GraphField, GridPolicy, LineField, Rule, Scalable, StarGraphGrid, WaveParams,
};

use crate::config::{ConfigError, ExperimentSpec, Perturbation};
use crate::output::{num, opt, Table};

/// A sample counts as resolved while `|E(t) − E(0)| ≤ RESOLVED_TOL·‖U₀‖²_{H¹}`.
pub const RESOLVED_TOL: f64 = 1e-3;

#[derive(Debug)]
pub enum ExperimentError {
    Config(ConfigError),
    /// Parameters outside the hypotheses of the experiment, or a grid that
    /// cannot resolve the profile.
    Regime(String),
    Numerical(graphnls::Error),
    Acceptance(String),
}

impl ExperimentError {
    /// 1 regime or config, 2 numerical failure, 3 failed acceptance check.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) | ExperimentError::Regime(_) => 1,
            ExperimentError::Numerical(_) => 2,
            ExperimentError::Acceptance(_) => 3,
        }
    }
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentError::Config(e) => write!(f, "config error: {e}"),
            ExperimentError::Regime(m) => write!(f, "regime error: {m}"),
            ExperimentError::Numerical(e) => write!(f, "numerical failure: {e}"),
            ExperimentError::Acceptance(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl std::error::Error for ExperimentError {}

impl From<ConfigError> for ExperimentError {
    fn from(e: ConfigError) -> Self {
        ExperimentError::Config(e)
    }
}

impl From<graphnls::Error> for ExperimentError {
    fn from(e: graphnls::Error) -> Self {
        use graphnls::Error as E;
        match e {
            E::Existence(_) | E::InvalidArgument(_) | E::InvalidGrid(_) | E::GridTooCoarse(_) | E::Precondition(_) => {
                ExperimentError::Regime(e.to_string())
            }
            other => ExperimentError::Numerical(other),
        }
    }
}

type Result<T> = std::result::Result<T, ExperimentError>;

/// One row of a pass/fail table. Rows without a tolerance are informational.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self { name: name.into(), value, tol: Some(tol), pass: value.is_finite() && value < tol }
    }

    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Self { name: name.into(), value, tol: None, pass: true }
    }

    pub fn flag(name: impl Into<String>, value: f64, pass: bool) -> Self {
        Self { name: name.into(), value, tol: None, pass }
    }
}

/// A list of checks with the run metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub metadata: Vec<(String, String)>,
    pub checks: Vec<Check>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(self.metadata.clone(), &["check", "value", "tol", "pass"]);
        for c in &self.checks {
            t.push(vec![c.name.clone(), num(c.value), opt(c.tol), c.pass.to_string()]);
        }
        t
    }
}

/// Record regime violations. Without `force` they abort the run; with it they
/// are logged and written to the metadata.
fn guard(spec: &ExperimentSpec, violations: Vec<String>, metadata: &mut Vec<(String, String)>) -> Result<()> {
    if violations.is_empty() {
        return Ok(());
    }
    let msg = violations.join("; ");
    if !spec.force {
        return Err(ExperimentError::Regime(format!("{msg} (use --force to run anyway)")));
    }
    log::warn!("forced past regime check: {msg}");
    metadata.push(("forced".into(), msg));
    Ok(())
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Grid for profile checks: Simpson weights whenever the sample count is odd.
fn profile_grid(n_edges: usize, length: f64, h: f64, points: Option<usize>) -> Result<StarGraphGrid> {
    let m = points.unwrap_or_else(|| {
        let intervals = (length / h).round().max(2.0) as usize;
        intervals + intervals % 2 + 1
    });
    let g = StarGraphGrid::new(n_edges, length, m)?;
    Ok(if m % 2 == 1 { g.with_rule(Rule::Simpson)? } else { g })
}

/// Evolution grid: `L = max(40, profile length)` unless given.
fn evolution_grid(spec: &ExperimentSpec, n_edges: usize, profile_length: f64) -> Result<StarGraphGrid> {
    let n = &spec.numerics;
    let length = n.length.unwrap_or_else(|| profile_length.max(40.0));
    Ok(match n.points {
        Some(m) => StarGraphGrid::new(n_edges, length, m)?,
        None => StarGraphGrid::with_spacing(n_edges, length, n.h)?,
    })
}

fn evolution_config(spec: &ExperimentSpec, t_end: f64) -> EvolutionConfig {
    let n = &spec.numerics;
    EvolutionConfig {
        dt: n.dt,
        t_end,
        scheme: n.scheme,
        refine_on_blowup: n.refine,
        monitor_stride: n.stride,
        ..EvolutionConfig::default()
    }
}

fn wave(spec: &ExperimentSpec) -> Result<WaveParams> {
    let m = &spec.model;
    Ok(WaveParams::new(m.n_edges, m.alpha, m.omega, m.p, m.k)?)
}

/// The initial datum built from `phi` by the configured perturbation.
pub fn perturbed(phi: &GraphField, spec: &ExperimentSpec, lambda: f64) -> Result<GraphField> {
    Ok(match spec.perturbation {
        Perturbation::Scaling => phi.scale(lambda)?,
        Perturbation::Multiplicative => phi.scaled(Complex64::new(1.0 + spec.epsilon, 0.0)),
        Perturbation::Gaussian => {
            let (c, w, k) = (spec.bump_center, spec.bump_width, spec.bump_momentum);
            let bump = GraphField::symmetric(*phi.grid(), |x| {
                let r = (x - c) / w;
                Complex64::from_polar((-r * r).exp(), k * x)
            });
            phi.combine(Complex64::new(1.0, 0.0), &bump, Complex64::new(spec.epsilon, 0.0))?
        }
    })
}

/// `sup_x ||u| − |φ||`.
fn modulus_deviation(u: &GraphField, phi: &GraphField) -> f64 {
    u.samples()
        .as_slice()
        .iter()
        .zip(phi.samples().as_slice())
        .map(|(a, b)| (a.norm() - b.norm()).abs())
        .fold(0.0, f64::max)
}

/// Profile residuals, variational identities and closed-form norms of `Φ_k^α`.
pub fn run_verify_profile(spec: &ExperimentSpec) -> Result<CheckReport> {
    let mut metadata = spec.metadata();
    guard(spec, Vec::new(), &mut metadata)?;
    let w = wave(spec)?;
    let length = spec.numerics.length.unwrap_or_else(|| w.default_length());
    let grid = profile_grid(w.n_edges, length, spec.profile_h, spec.numerics.points)?;
    metadata.push(("profile_points".into(), grid.n_points().to_string()));
    metadata.push(("profile_length".into(), length.to_string()));
    let phi = build_profile_delta(&w, &grid)?;
    let r = delta_residuals(&w, &phi);
    let model = DeltaModel::new(w.alpha, w.p)?;
    let n = model.norms(&phi);
    let mut checks = vec![
        Check::below("stationary_residual", r.stationary, 1e-5),
        Check::below("vertex_continuity", r.continuity, 1e-12),
        Check::below("flux_residual", r.vertex, 1e-5),
        Check::below("nehari_rel", model.nehari_from(&n, w.omega).abs() / n.power, 1e-6),
        Check::below("virial_rel", model.virial_from(&n).abs() / n.power, 1e-6),
    ];
    if w.k == 0 {
        let s = model.action_from(&n, w.omega);
        checks.push(Check::below("action_vs_power_rel", relative(s, power_weight(w.p) * n.power), 1e-6));
        checks.push(Check::below("action_vs_ground_level_rel", relative(s, dc_ground_level(&w)?), 1e-6));
    }
    checks.push(Check::below("lp_norm_closed_rel", relative(n.power, profile_lp_norm_closed(&w)?), 1e-7));
    checks.push(Check::below("vertex_value_closed_rel", relative(phi.vertex().norm_sqr(), vertex_abs2_closed(&w)?), 1e-7));
    let sv = second_variation_from_norms(n.kinetic, n.power, w.p);
    checks.push(Check::info("second_variation_sampled", sv));
    checks.push(Check::info("second_variation_closed", second_variation_closed(&w)?));
    Ok(CheckReport { metadata, checks })
}

/// Virial identity `f″ = 8P` along a Gaussian-perturbed standing wave.
#[derive(Debug, Clone)]
pub struct VirialReport {
    pub report: CheckReport,
    /// Sample times where `f″` was compared.
    pub times: Vec<f64>,
    pub fpp: Vec<f64>,
    pub eight_p: Vec<f64>,
    pub record: TrajectoryRecord,
}

impl VirialReport {
    pub fn series_table(&self) -> Table {
        let mut t = Table::new(self.report.metadata.clone(), &["t", "fpp", "eight_p", "rel_err"]);
        for i in 0..self.times.len() {
            t.push(vec![
                num(self.times[i]),
                num(self.fpp[i]),
                num(self.eight_p[i]),
                num(relative(self.fpp[i], self.eight_p[i])),
            ]);
        }
        t
    }
}

/// Number of sample times at which `f″` is compared with `8P`.
pub const VIRIAL_SAMPLES: usize = 20;

pub fn run_verify_virial(spec: &ExperimentSpec) -> Result<VirialReport> {
    let mut metadata = spec.metadata();
    guard(spec, Vec::new(), &mut metadata)?;
    let w = wave(spec)?;
    let grid = evolution_grid(spec, w.n_edges, w.default_length())?;
    let phi = build_profile_delta_with(&w, &grid, GridPolicy::Lenient)?;
    let u0 = perturbed(&phi, spec, spec.lambdas[0])?;
    let model = DeltaModel::new(w.alpha, w.p)?;
    let cfg = evolution_config(spec, spec.numerics.t_end.unwrap_or(0.5));
    let out = evolve_with(&u0, &cfg, &model, w.omega, |_, _, _| {})?;
    let rec = out.record;
    if let Some(t) = rec.blowup_time {
        return Err(ExperimentError::Numerical(graphnls::Error::Postcondition(format!(
            "trajectory flagged at t = {t}; the virial check needs a regular solution"
        ))));
    }
    let n = rec.len();
    if n < VIRIAL_SAMPLES + 2 {
        return Err(ExperimentError::Config(ConfigError::Invalid {
            key: "stride".into(),
            value: spec.numerics.stride.to_string(),
            reason: format!("only {n} monitor samples; need at least {}", VIRIAL_SAMPLES + 2),
        }));
    }
    let dtau = rec.times[1] - rec.times[0];
    let uniform = rec.times.windows(2).all(|p| ((p[1] - p[0]) - dtau).abs() <= 1e-9 * dtau);
    if !uniform {
        return Err(ExperimentError::Numerical(graphnls::Error::Postcondition("monitor samples are not uniform".into())));
    }
    let f = &rec.virial_f;
    let fpp_at = |i: usize| (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (dtau * dtau);
    let mut times = Vec::new();
    let mut fpp = Vec::new();
    let mut eight_p = Vec::new();
    for k in 0..VIRIAL_SAMPLES {
        let i = 1 + (k * (n - 3) + (VIRIAL_SAMPLES - 1) / 2) / (VIRIAL_SAMPLES - 1);
        times.push(rec.times[i]);
        fpp.push(fpp_at(i));
        eight_p.push(8.0 * rec.virial_p[i]);
    }
    let worst = fpp.iter().zip(&eight_p).map(|(a, b)| relative(*a, *b)).fold(0.0, f64::max);
    let worst_all = (1..n - 1).map(|i| relative(fpp_at(i), 8.0 * rec.virial_p[i])).fold(0.0, f64::max);
    let fprime_fd = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dtau);
    let checks = vec![
        Check::below("virial_fpp_rel_max", worst, 1e-3),
        Check::info("virial_fpp_rel_max_all_samples", worst_all),
        Check::below("fprime0_rel", relative(fprime_fd, rec.virial_fprime[0]), 1e-4),
        Check::info("fprime0", rec.virial_fprime[0]),
        Check::info("mass_drift_rel", TrajectoryRecord::max_relative_drift(&rec.mass)),
        Check::info("energy_drift_rel", TrajectoryRecord::max_relative_drift(&rec.energy)),
    ];
    Ok(VirialReport { report: CheckReport { metadata, checks }, times, fpp, eight_p, record: rec })
}

/// One λ of a blow-up scan.
#[derive(Debug, Clone)]
pub struct BlowupRun {
    pub lambda: f64,
    pub membership0: MembershipReport,
    /// `S_ω(U₀) − d_eq`.
    pub action_minus_ground: f64,
    /// Positive root of `f(0) + f′(0)t + 8(S_ω(U₀) − d_eq)t²`, when the last coefficient is negative.
    pub t_cap: Option<f64>,
    pub t_end: f64,
    pub t_blowup: Option<f64>,
    pub reason: Option<BlowupReason>,
    /// Membership at each monitor sample.
    pub membership: Vec<MembershipReport>,
    pub record: TrajectoryRecord,
}

impl BlowupRun {
    pub fn resolved(&self) -> Vec<bool> {
        self.record.resolved(RESOLVED_TOL)
    }

    /// Membership at every sample taken strictly before the flag.
    pub fn member_before_flag(&self) -> bool {
        let t_flag = self.t_blowup.unwrap_or(f64::INFINITY);
        self.record.times.iter().zip(&self.membership).filter(|(t, _)| **t < t_flag).all(|(_, m)| m.member)
    }

    /// Membership at every resolved sample.
    pub fn member_while_resolved(&self) -> bool {
        self.resolved().iter().zip(&self.membership).filter(|(r, _)| **r).all(|(_, m)| m.member)
    }

    /// Largest `P(U(t))` over resolved samples; negative means `f″ = 8P < 0` throughout.
    pub fn max_virial_resolved(&self) -> f64 {
        self.resolved()
            .iter()
            .zip(&self.record.virial_p)
            .filter(|(r, _)| **r)
            .map(|(_, p)| *p)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct BlowupReport {
    pub metadata: Vec<(String, String)>,
    pub omega: f64,
    pub d_eq: f64,
    pub set: BlowupSet,
    pub runs: Vec<BlowupRun>,
}

impl BlowupReport {
    /// Every run with `λ > 1` is flagged before its virial cap and stays in the
    /// blow-up set until the flag.
    pub fn passed(&self) -> bool {
        self.runs.iter().filter(|r| r.lambda > 1.0).all(|r| {
            r.membership0.member
                && r.member_before_flag()
                && matches!((r.t_blowup, r.t_cap), (Some(t), Some(cap)) if t <= cap)
        })
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(
            self.metadata.clone(),
            &[
                "lambda",
                "member",
                "action_minus_ground",
                "t_blowup",
                "reason",
                "t_cap",
                "member_before_flag",
                "max_virial_resolved",
            ],
        );
        for r in &self.runs {
            t.push(vec![
                r.lambda.to_string(),
                r.membership0.member.to_string(),
                num(r.action_minus_ground),
                opt(r.t_blowup),
                r.reason.map_or("none".into(), |x| x.to_string()),
                opt(r.t_cap),
                r.member_before_flag().to_string(),
                num(r.max_virial_resolved()),
            ]);
        }
        t
    }
}

/// Positive root of `f0 + f1·t + c·t²` for `c < 0`.
pub fn virial_cap(f0: f64, f1: f64, c: f64) -> Option<f64> {
    if !(c < 0.0) {
        return None;
    }
    let disc = f1 * f1 - 4.0 * c * f0;
    Some((-f1 - disc.sqrt()) / (2.0 * c))
}

/// λ-scaled standing waves in the strong-instability regime: membership,
/// evolution and blow-up time for each λ, run in parallel.
pub fn run_blowup_scan(spec: &ExperimentSpec) -> Result<BlowupReport> {
    let mut metadata = spec.metadata();
    let m = spec.model;
    let mut violations = Vec::new();
    let omega = match spec.omega_factor {
        Some(f) if m.alpha < 0.0 => {
            let thr = instability_threshold(m.p, ThresholdMode::DeltaGraph { alpha: m.alpha, n_edges: m.n_edges })?;
            f * thr.omega_star
        }
        Some(_) => {
            return Err(ExperimentError::Config(ConfigError::Invalid {
                key: "omega_factor".into(),
                value: format!("{:?}", spec.omega_factor),
                reason: "the threshold frequency is defined for alpha < 0".into(),
            }))
        }
        None => m.omega,
    };
    if m.alpha > 0.0 {
        if m.p < 5.0 {
            violations.push(format!("alpha > 0 needs p >= 5, got p = {}", m.p));
        }
    } else if m.alpha < 0.0 {
        if m.p <= 5.0 {
            violations.push(format!("alpha < 0 needs p > 5, got p = {}", m.p));
        } else {
            let thr = instability_threshold(m.p, ThresholdMode::DeltaGraph { alpha: m.alpha, n_edges: m.n_edges })?;
            if omega < thr.omega_star {
                violations.push(format!("alpha < 0 needs omega >= omega_1 = {}, got {omega}", thr.omega_star));
            }
        }
    } else {
        violations.push("the instability results are stated for alpha != 0".into());
    }
    if m.k != 0 {
        violations.push(format!("blow-up sets are built on the k = 0 profile, got k = {}", m.k));
    }
    if let Some(l) = spec.lambdas.iter().find(|l| **l <= 1.0) {
        violations.push(format!("scaling factors must exceed 1, got {l}"));
    }
    if spec.perturbation != Perturbation::Scaling {
        violations.push(format!("blow-up scans use lambda-scaling, got {}", spec.perturbation));
    }
    guard(spec, violations, &mut metadata)?;
    metadata.push(("omega_resolved".into(), omega.to_string()));

    let w = WaveParams::ground(m.n_edges, m.alpha, omega, m.p)?;
    let grid = evolution_grid(spec, w.n_edges, w.default_length())?;
    let phi = build_profile_delta_with(&w, &grid, GridPolicy::Lenient)?;
    let reference = MembershipReference::new(&w, &grid)?;
    let set = if m.alpha > 0.0 { BlowupSet::Plus } else { BlowupSet::Minus };
    let model = DeltaModel::new(m.alpha, m.p)?;
    metadata.push(("d_eq".into(), reference.d_eq.to_string()));
    metadata.push(("set".into(), format!("{set:?}").to_ascii_lowercase()));

    let runs = spec
        .lambdas
        .par_iter()
        .map(|&lambda| -> Result<BlowupRun> {
            let u0 = perturbed(&phi, spec, lambda)?;
            let membership0 = set_membership(&u0, &reference, set);
            let s0 = graphnls::evolution::monitor_graph(&u0, &model, omega);
            let action_minus_ground = s0.functionals.action - reference.d_eq;
            let t_cap = virial_cap(s0.virial_f, s0.virial_fprime, 8.0 * action_minus_ground);
            let t_end = match (spec.numerics.t_end, t_cap) {
                (Some(t), _) => t,
                (None, Some(cap)) => 1.01 * cap,
                (None, None) => 1.0,
            };
            let cfg = evolution_config(spec, t_end);
            let mut membership = Vec::new();
            let out = evolve_with(&u0, &cfg, &model, omega, |_, u, _| {
                membership.push(set_membership(u, &reference, set));
            })?;
            log::info!("lambda = {lambda}: blow-up {:?} at {:?}", out.record.blowup_reason, out.record.blowup_time);
            Ok(BlowupRun {
                lambda,
                membership0,
                action_minus_ground,
                t_cap,
                t_end,
                t_blowup: out.record.blowup_time,
                reason: out.record.blowup_reason,
                membership,
                record: out.record,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlowupReport { metadata, omega, d_eq: reference.d_eq, set, runs })
}

/// Long-time evolution of a perturbed standing wave in the stable regime.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub metadata: Vec<(String, String)>,
    /// `sup_{t,x} ||U(t,x)| − |Φ(x)||` over monitor samples.
    pub max_modulus_deviation: f64,
    /// `sup_x ||U(t,x)| − |Φ(x)||` at each monitor sample.
    pub modulus_deviation: Vec<f64>,
    pub record: TrajectoryRecord,
    pub final_time: f64,
}

impl StabilityReport {
    pub fn blew_up(&self) -> bool {
        self.record.blowup_time.is_some()
    }

    /// No blow-up flag and modulus deviation below 0.1.
    pub fn passed(&self) -> bool {
        !self.blew_up() && self.max_modulus_deviation < 0.1
    }

    pub fn mass_drift(&self) -> f64 {
        TrajectoryRecord::max_relative_drift(&self.record.mass)
    }

    pub fn energy_drift(&self) -> f64 {
        TrajectoryRecord::max_relative_drift(&self.record.energy)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(self.metadata.clone(), &["t", "mass", "energy", "h1", "modulus_deviation"]);
        let r = &self.record;
        for i in 0..r.len() {
            t.push(vec![num(r.times[i]), num(r.mass[i]), num(r.energy[i]), num(r.h1_norm[i]), num(self.modulus_deviation[i])]);
        }
        t.metadata.push(("max_modulus_deviation".into(), num(self.max_modulus_deviation)));
        t.metadata.push(("blowup_time".into(), opt(r.blowup_time)));
        t
    }
}

pub fn run_stability_demo(spec: &ExperimentSpec) -> Result<StabilityReport> {
    let mut metadata = spec.metadata();
    let mut violations = Vec::new();
    if spec.model.p >= 5.0 {
        violations.push(format!("the stability demo needs p < 5, got p = {}", spec.model.p));
    }
    guard(spec, violations, &mut metadata)?;
    let w = wave(spec)?;
    let grid = evolution_grid(spec, w.n_edges, w.default_length())?;
    let phi = build_profile_delta_with(&w, &grid, GridPolicy::Lenient)?;
    let u0 = perturbed(&phi, spec, spec.lambdas[0])?;
    let model = DeltaModel::new(w.alpha, w.p)?;
    let cfg = evolution_config(spec, spec.numerics.t_end.unwrap_or(20.0));
    let mut modulus_deviation = Vec::new();
    let out = evolve_with(&u0, &cfg, &model, w.omega, |_, u, _| modulus_deviation.push(self::modulus_deviation(u, &phi)))?;
    let max_modulus_deviation = modulus_deviation.iter().copied().fold(0.0, f64::max);
    Ok(StabilityReport { metadata, max_modulus_deviation, modulus_deviation, record: out.record, final_time: out.final_time })
}

/// Threshold `ξ₁(p)` over a grid of powers.
#[derive(Debug, Clone)]
pub struct ThresholdRow {
    pub p: f64,
    pub xi: f64,
    /// `ω₁N²/α² = 1/ξ₁²`, which is also `ω₃γ²/4`.
    pub omega_scaled: f64,
    pub residual: f64,
    pub sign_changes: usize,
}

#[derive(Debug, Clone)]
pub struct ThresholdTable {
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<ThresholdRow>,
}

impl ThresholdTable {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.residual < 1e-12 && r.sign_changes == 1)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(self.metadata.clone(), &["p", "xi1", "omega1_N2_over_alpha2", "residual", "sign_changes"]);
        for r in &self.rows {
            t.push(vec![r.p.to_string(), num(r.xi), num(r.omega_scaled), num(r.residual), r.sign_changes.to_string()]);
        }
        t
    }
}

pub fn run_threshold_table(spec: &ExperimentSpec) -> Result<ThresholdTable> {
    let mut metadata = spec.metadata();
    metadata.push(("omega1".into(), "alpha^2/(N^2 xi1^2)".into()));
    metadata.push(("omega3".into(), "4/(gamma^2 xi1^2)".into()));
    if let Some(p) = spec.p_grid.iter().find(|p| !(**p > 5.0)) {
        return Err(ExperimentError::Regime(format!("the threshold equation needs p > 5, got p = {p}")));
    }
    let rows = spec
        .p_grid
        .par_iter()
        .map(|&p| -> Result<ThresholdRow> {
            let r = instability_threshold(p, ThresholdMode::DeltaGraph { alpha: 1.0, n_edges: 1 })?;
            Ok(ThresholdRow { p, xi: r.xi, omega_scaled: r.omega_star, residual: r.residual, sign_changes: r.sign_changes })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ThresholdTable { metadata, rows })
}

/// A blow-up run of the δ′ suite.
#[derive(Debug, Clone)]
pub struct DeltaPrimeRun {
    pub branch: Branch,
    pub omega: f64,
    pub lambda: f64,
    pub t_blowup: Option<f64>,
    pub reason: Option<BlowupReason>,
    pub record: TrajectoryRecord,
}

#[derive(Debug, Clone)]
pub struct DeltaPrimeReport {
    pub report: CheckReport,
    pub omega3: f64,
    pub omega2: Omega2Estimate,
    pub runs: Vec<DeltaPrimeRun>,
}

impl DeltaPrimeReport {
    pub fn passed(&self) -> bool {
        self.report.passed() && self.runs.iter().all(|r| r.t_blowup.is_some())
    }

    pub fn table(&self) -> Table {
        let mut t = self.report.table();
        for r in &self.runs {
            let name = format!("{}_blowup_time", branch_name(r.branch));
            t.push(vec![name, opt(r.t_blowup), "none".into(), r.t_blowup.is_some().to_string()]);
        }
        t
    }
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::Odd => "odd",
        Branch::Asymmetric => "asymmetric",
        Branch::AsymmetricSwapped => "swapped",
    }
}

/// Large-frequency behaviour of the asymmetric roots:
/// `t₁ ≈ 1/(γ√ω)` and `1 − t₂ ≈ t₁^{p−1}/2`. Returns both relative errors.
pub fn asymmetric_asymptotics(gamma: f64, omega: f64, p: f64) -> Result<(f64, f64)> {
    let r = solve_t1_t2(gamma, omega, p)?;
    let t1 = 1.0 / (gamma * omega.sqrt());
    let u = 0.5 * t1.powf(p - 1.0);
    Ok((relative(r.t1, t1), relative(r.one_minus_t2, u)))
}

/// Profiles, roots and blow-up runs for the δ′ line.
pub fn run_delta_prime_suite(spec: &ExperimentSpec) -> Result<DeltaPrimeReport> {
    let mut metadata = spec.metadata();
    let m = spec.model;
    let factor = spec.omega_factor.unwrap_or(1.2);
    let mut violations = Vec::new();
    if factor < 1.0 {
        violations.push(format!("blow-up runs need omega at or above the threshold, got factor {factor}"));
    }
    if spec.lambdas[0] <= 1.0 {
        violations.push(format!("scaling factor must exceed 1, got {}", spec.lambdas[0]));
    }
    if m.p <= 5.0 {
        return Err(ExperimentError::Regime(format!("the δ′ thresholds need p > 5, got p = {}", m.p)));
    }
    guard(spec, violations, &mut metadata)?;

    let model = DeltaPrimeModel::new(m.gamma, m.p)?;
    let mut checks = Vec::new();
    let mut actions = Vec::new();
    for branch in [Branch::Odd, Branch::Asymmetric, Branch::AsymmetricSwapped] {
        let w = DeltaPrimeParams::new(m.gamma, m.omega, m.p, branch)?;
        let length = spec.numerics.length.unwrap_or_else(|| w.default_length());
        let grid = profile_grid(2, length, spec.profile_h, None)?;
        let phi = build_profile_delta_prime(&w, &grid)?;
        let r = delta_prime_residuals(&w, &phi);
        let n = model.norms(&phi);
        let name = branch_name(branch);
        checks.push(Check::below(format!("{name}_stationary_residual"), r.stationary, 1e-5));
        checks.push(Check::below(format!("{name}_derivative_continuity"), r.continuity, 1e-5));
        checks.push(Check::below(format!("{name}_jump_residual"), r.vertex, 1e-5));
        checks.push(Check::below(format!("{name}_nehari_rel"), model.nehari_from(&n, m.omega).abs() / n.power, 1e-6));
        checks.push(Check::below(format!("{name}_virial_rel"), model.virial_from(&n).abs() / n.power, 1e-6));
        actions.push(model.report(&phi, m.omega));
    }
    let (a, s) = (actions[1], actions[2]);
    let mirror = relative(s.action, a.action).max(relative(s.energy, a.energy)).max(relative(s.mass, a.mass));
    checks.push(Check::below("swapped_mirror_rel", mirror, 1e-12));

    let roots = solve_t1_t2(m.gamma, m.omega, m.p)?;
    checks.push(Check::below("t1t2_power_residual", roots.residual_power, 1e-12));
    checks.push(Check::below("t1t2_sum_residual", roots.residual_sum, 1e-12));
    let big = solve_t1_t2(m.gamma, 1e4, m.p)?;
    checks.push(Check::below("t1t2_power_residual_large_omega", big.residual_power, 1e-12));
    checks.push(Check::below("t1t2_sum_residual_large_omega", big.residual_sum, 1e-12));
    let (e1, e2) = asymmetric_asymptotics(m.gamma, 1e4, m.p)?;
    checks.push(Check::below("t1_asymptotic_rel", e1, 0.05));
    checks.push(Check::below("one_minus_t2_asymptotic_rel", e2, 0.05));

    let omega3 = instability_threshold(m.p, ThresholdMode::DeltaPrime { gamma: m.gamma })?.omega_star;
    let omega2 = estimate_omega2(m.gamma, m.p)?;
    checks.push(Check::info("omega3", omega3));
    checks.push(Check::info("omega2_estimate", omega2.omega2));
    checks.push(Check::info("omega2_sign_changes", omega2.sign_changes as f64));
    metadata.push(("omega3".into(), omega3.to_string()));
    metadata.push(("omega2_estimate".into(), omega2.omega2.to_string()));

    let runs = if spec.dynamics {
        let lambda = spec.lambdas[0];
        let one = |branch: Branch, omega: f64| -> Result<DeltaPrimeRun> {
            let w = DeltaPrimeParams::new(m.gamma, omega, m.p, branch)?;
            let grid = evolution_grid(spec, 2, w.default_length())?;
            let phi: LineField = build_profile_delta_prime_with(&w, &grid, GridPolicy::Lenient)?;
            let u0 = phi.scale(lambda)?;
            let cfg = evolution_config(spec, spec.numerics.t_end.unwrap_or(1.0));
            let out = evolve_delta_prime(&u0, &cfg, &model, omega)?;
            log::info!("{} at omega = {omega}: blow-up at {:?}", branch_name(branch), out.record.blowup_time);
            Ok(DeltaPrimeRun {
                branch,
                omega,
                lambda,
                t_blowup: out.record.blowup_time,
                reason: out.record.blowup_reason,
                record: out.record,
            })
        };
        let (odd, asym) = rayon::join(|| one(Branch::Odd, factor * omega3), || one(Branch::Asymmetric, factor * omega2.omega2));
        vec![odd?, asym?]
    } else {
        Vec::new()
    };
    Ok(DeltaPrimeReport { report: CheckReport { metadata, checks }, omega3, omega2, runs })
}
