//! Time integration of NLS-δ on the truncated star graph and NLS-δ′ on the split line.
//!
//! The linear part is Crank–Nicolson on the finite-difference Hamiltonian of
//! [`lattice`]; the vertex conditions enter through the vertex rows of that
//! Hamiltonian, so the shared vertex value and the flux (or jump) condition are
//! imposed at every time level. Two treatments of the nonlinearity:
//!
//! * [`Scheme::StrangSplit`]: exact phase rotation `u·exp(iτ|u|^{p−1})` for half
//!   steps around each linear step;
//! * [`Scheme::CrankNicolsonRelaxed`]: Crank–Nicolson with the relaxed
//!   potential `φ^{n+1/2} = 2|u^n|^{p−1} − φ^{n−1/2}`, which needs a fresh
//!   factorization every step but no step-size restriction.
//!
//! Both conserve the discrete mass `Σ W|u|²`, which is the trapezoid `‖u‖₂²`.

mod lattice;
mod membership;

pub use membership::{set_membership, BlowupSet, MembershipReference, MembershipReport, MASS_TOLERANCE};

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::functionals::{DeltaModel, DeltaPrimeModel, FunctionalReport, Norms};
use crate::grid::{EdgeSamples, GraphField, LineField, StarGraphGrid};
use lattice::{ImplicitSystem, Junction, Lattice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    CrankNicolsonRelaxed,
    #[default]
    StrangSplit,
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crank_nicolson_relaxed" | "relaxed" | "cn" => Ok(Scheme::CrankNicolsonRelaxed),
            "strang_split" | "strang" => Ok(Scheme::StrangSplit),
            other => Err(Error::InvalidArgument(format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OuterBc {
    #[default]
    Dirichlet,
    Neumann,
}

impl FromStr for OuterBc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(OuterBc::Dirichlet),
            "neumann" => Ok(OuterBc::Neumann),
            other => Err(Error::InvalidArgument(format!("unknown boundary condition '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowupReason {
    GradNorm,
    Amplitude,
    Nan,
}

impl std::fmt::Display for BlowupReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BlowupReason::GradNorm => "gradnorm",
            BlowupReason::Amplitude => "amplitude",
            BlowupReason::Nan => "nan",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub outer_bc: OuterBc,
    /// Flag when the H¹ norm exceeds this multiple of its initial value.
    pub blowup_gradnorm_factor: f64,
    /// Flag when `sup|u|` exceeds this multiple of its initial value.
    pub blowup_amp_factor: f64,
    /// Halve `dt` every time the H¹ norm doubles.
    pub refine_on_blowup: bool,
    pub max_refinements: u32,
    /// Steps between monitor samples.
    pub monitor_stride: usize,
    /// `false` drops the nonlinearity (linear Schrödinger flow).
    pub nonlinear: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            dt: 2.5e-5,
            t_end: 1.0,
            scheme: Scheme::StrangSplit,
            outer_bc: OuterBc::Dirichlet,
            blowup_gradnorm_factor: 50.0,
            blowup_amp_factor: 20.0,
            refine_on_blowup: false,
            max_refinements: 20,
            monitor_stride: 100,
            nonlinear: true,
        }
    }
}

impl EvolutionConfig {
    /// The split scheme is limited to `dt ≤ h²/4`; Crank–Nicolson is not.
    pub fn validate(&self, grid: &StarGraphGrid) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidArgument(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.monitor_stride == 0 {
            return Err(Error::InvalidArgument("monitor_stride must be at least 1".into()));
        }
        if !(self.blowup_gradnorm_factor > 1.0 && self.blowup_amp_factor > 1.0) {
            return Err(Error::InvalidArgument("blow-up factors must exceed 1".into()));
        }
        let h = grid.h();
        if self.scheme == Scheme::StrangSplit && self.dt > 0.25 * h * h * (1.0 + 1e-9) {
            return Err(Error::InvalidArgument(format!(
                "split scheme needs dt <= h²/4 = {:e}, got {:e}",
                0.25 * h * h,
                self.dt
            )));
        }
        Ok(())
    }
}

/// Monitored series, one entry per sample.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub action: Vec<f64>,
    pub nehari: Vec<f64>,
    pub virial_p: Vec<f64>,
    /// `∫x²|U|²`
    pub virial_f: Vec<f64>,
    /// `4 Im∫xŪ∂ₓU`
    pub virial_fprime: Vec<f64>,
    pub h1_norm: Vec<f64>,
    pub sup_norm: Vec<f64>,
    /// Mass beyond `0.8·L`.
    pub tail_mass: Vec<f64>,
    /// Step size in use when the sample was taken.
    pub dt: Vec<f64>,
    pub blowup_time: Option<f64>,
    pub blowup_reason: Option<BlowupReason>,
    pub steps: usize,
}

/// One monitor sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorSample {
    pub functionals: FunctionalReport,
    pub virial_f: f64,
    pub virial_fprime: f64,
    pub h1_norm: f64,
    pub sup_norm: f64,
    pub tail_mass: f64,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, t: f64, dt: f64, s: &MonitorSample) {
        self.times.push(t);
        self.mass.push(s.functionals.mass);
        self.energy.push(s.functionals.energy);
        self.action.push(s.functionals.action);
        self.nehari.push(s.functionals.nehari);
        self.virial_p.push(s.functionals.virial_p);
        self.virial_f.push(s.virial_f);
        self.virial_fprime.push(s.virial_fprime);
        self.h1_norm.push(s.h1_norm);
        self.sup_norm.push(s.sup_norm);
        self.tail_mass.push(s.tail_mass);
        self.dt.push(dt);
    }

    /// `max_t |q(t) − q(0)| / |q(0)|`.
    pub fn max_relative_drift(series: &[f64]) -> f64 {
        let Some(&q0) = series.first() else { return 0.0 };
        series.iter().map(|q| (q - q0).abs()).fold(0.0, f64::max) / q0.abs()
    }

    /// Samples whose energy stays within `tol·‖U₀‖²_{H¹}` of the initial
    /// energy, i.e. where the grid still resolves the solution.
    pub fn resolved(&self, tol: f64) -> Vec<bool> {
        let (Some(&e0), Some(&h0)) = (self.energy.first(), self.h1_norm.first()) else {
            return Vec::new();
        };
        self.energy.iter().map(|e| (e - e0).abs() <= tol * h0 * h0).collect()
    }

    /// CSV with header `t,mass,energy,action,I,P,f,fprime,h1,tailmass`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,mass,energy,action,I,P,f,fprime,h1,tailmass\n");
        for i in 0..self.len() {
            let _ = writeln!(
                s,
                "{:.10e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[i],
                self.mass[i],
                self.energy[i],
                self.action[i],
                self.nehari[i],
                self.virial_p[i],
                self.virial_f[i],
                self.virial_fprime[i],
                self.h1_norm[i],
                self.tail_mass[i]
            );
        }
        s
    }
}

/// A finished run: the monitored series and the last state reached (the last
/// finite one if the solver produced NaN).
#[derive(Debug, Clone)]
pub struct Evolution<F> {
    pub record: TrajectoryRecord,
    pub final_state: F,
    pub final_time: f64,
}

impl<F> Evolution<F> {
    pub fn blew_up(&self) -> bool {
        self.record.blowup_time.is_some()
    }
}

/// Fields the integrator can advance.
pub trait Evolvable: Clone + Sized {
    fn samples(&self) -> &EdgeSamples;
    fn from_evolved(samples: EdgeSamples) -> Result<Self>;
}

impl Evolvable for GraphField {
    fn samples(&self) -> &EdgeSamples {
        GraphField::samples(self)
    }

    fn from_evolved(samples: EdgeSamples) -> Result<Self> {
        GraphField::from_samples(samples)
    }
}

impl Evolvable for LineField {
    fn samples(&self) -> &EdgeSamples {
        LineField::samples(self)
    }

    fn from_evolved(samples: EdgeSamples) -> Result<Self> {
        LineField::from_samples(samples)
    }
}

/// `ρ ↦ ρ^{(p−1)/2}`, i.e. `|u|^{p−1}` from `|u|²`.
#[derive(Debug, Clone, Copy)]
enum PowerLaw {
    Int(i32),
    HalfInt(i32),
    General(f64),
}

impl PowerLaw {
    fn new(p: f64) -> Self {
        let e = 0.5 * (p - 1.0);
        if e.fract() == 0.0 && e.abs() < 64.0 {
            PowerLaw::Int(e as i32)
        } else if (2.0 * e).fract() == 0.0 && e.abs() < 64.0 {
            PowerLaw::HalfInt(e.floor() as i32)
        } else {
            PowerLaw::General(e)
        }
    }

    #[inline]
    fn eval(self, rho: f64) -> f64 {
        match self {
            PowerLaw::Int(1) => rho,
            PowerLaw::Int(n) => rho.powi(n),
            PowerLaw::HalfInt(n) => rho.powi(n) * rho.sqrt(),
            PowerLaw::General(e) => rho.powf(e),
        }
    }
}

struct Stepper {
    lat: Lattice,
    scheme: Scheme,
    nonlinear: bool,
    law: PowerLaw,
    dt: f64,
    system: Option<ImplicitSystem>,
    pending_half: bool,
    phi_prev: Option<Vec<f64>>,
    rhs: Vec<Complex64>,
    pot: Vec<f64>,
}

impl Stepper {
    fn new(lat: Lattice, cfg: &EvolutionConfig, p: f64, dt: f64) -> Result<Self> {
        let len = lat.n_edges * lat.m;
        let mut s = Self {
            lat,
            scheme: cfg.scheme,
            nonlinear: cfg.nonlinear,
            law: PowerLaw::new(p),
            dt,
            system: None,
            pending_half: false,
            phi_prev: None,
            rhs: vec![Complex64::new(0.0, 0.0); len],
            pot: vec![0.0; len],
        };
        s.set_dt(dt)?;
        Ok(s)
    }

    /// Callers must [`Stepper::flush`] before changing the step.
    fn set_dt(&mut self, dt: f64) -> Result<()> {
        debug_assert!(!self.pending_half);
        self.dt = dt;
        self.phi_prev = None;
        self.system = match (self.scheme, self.nonlinear) {
            (Scheme::CrankNicolsonRelaxed, true) => None,
            _ => Some(ImplicitSystem::new(&self.lat, 0.5 * dt, None)?),
        };
        Ok(())
    }

    /// `u ← u·exp(iτ|u|^{p−1})`; returns `false` on a non-finite sample.
    fn rotate(&self, u: &mut [Complex64], tau: f64) -> bool {
        let mut acc = 0.0;
        for v in u.iter_mut() {
            let rho = v.norm_sqr();
            acc += rho;
            let (s, c) = (tau * self.law.eval(rho)).sin_cos();
            *v *= Complex64::new(c, s);
        }
        acc.is_finite()
    }

    fn flush(&mut self, u: &mut [Complex64]) -> bool {
        if self.pending_half {
            self.pending_half = false;
            return self.rotate(u, 0.5 * self.dt);
        }
        true
    }

    fn step(&mut self, u: &mut Vec<Complex64>) -> Result<bool> {
        let theta = 0.5 * self.dt;
        match (self.scheme, self.nonlinear) {
            (Scheme::CrankNicolsonRelaxed, true) => {
                let mut acc = 0.0;
                let prev = self.phi_prev.take();
                for (i, v) in u.iter().enumerate() {
                    let now = self.law.eval(v.norm_sqr());
                    acc += now;
                    self.pot[i] = match &prev {
                        Some(p) => 2.0 * now - p[i],
                        None => now,
                    };
                }
                if !acc.is_finite() {
                    return Ok(false);
                }
                let sys = ImplicitSystem::new(&self.lat, theta, Some(&self.pot))?;
                self.lat.explicit_half(u, theta, Some(&self.pot), &mut self.rhs);
                sys.solve(&self.lat, &mut self.rhs);
                std::mem::swap(u, &mut self.rhs);
                self.phi_prev = Some(prev.map_or_else(|| self.pot.clone(), |mut p| {
                    p.copy_from_slice(&self.pot);
                    p
                }));
            }
            _ => {
                if self.nonlinear {
                    let tau = if self.pending_half { self.dt } else { 0.5 * self.dt };
                    if !self.rotate(u, tau) {
                        return Ok(false);
                    }
                    self.pending_half = true;
                }
                let sys = self.system.as_ref().expect("linear system is built in set_dt");
                self.lat.explicit_half(u, theta, None, &mut self.rhs);
                sys.solve(&self.lat, &mut self.rhs);
                std::mem::swap(u, &mut self.rhs);
            }
        }
        Ok(u.iter().take(1).all(|v| v.is_finite()))
    }
}

fn prepare(samples: &EdgeSamples, bc: OuterBc) -> Vec<Complex64> {
    let mut u = samples.as_slice().to_vec();
    if bc == OuterBc::Dirichlet {
        let m = samples.grid().n_points();
        for j in 0..samples.grid().n_edges() {
            u[j * m + m - 1] = Complex64::new(0.0, 0.0);
        }
    }
    u
}

fn monitor_from(norms: &Norms, functionals: FunctionalReport, s: &EdgeSamples) -> MonitorSample {
    let grid = s.grid();
    MonitorSample {
        functionals,
        virial_f: s.weighted_l2_x(),
        virial_fprime: 4.0 * s.momentum_moment(),
        h1_norm: (norms.kinetic + norms.mass).sqrt(),
        sup_norm: s.sup_norm(),
        tail_mass: s.tail_mass(0.8 * grid.length()),
    }
}

/// Monitor quantities of a star-graph field.
pub fn monitor_graph(v: &GraphField, model: &DeltaModel, omega: f64) -> MonitorSample {
    let n = model.norms(v);
    monitor_from(&n, model.report_from(&n, omega), v.samples())
}

/// Monitor quantities of a line field.
pub fn monitor_line(v: &LineField, model: &DeltaPrimeModel, omega: f64) -> MonitorSample {
    let n = model.norms(v);
    monitor_from(&n, model.report_from(&n, omega), v.samples())
}

/// Flag blow-up from the latest sample of a running record.
pub fn detect_blowup(record: &TrajectoryRecord, cfg: &EvolutionConfig) -> Option<(f64, BlowupReason)> {
    let last = record.len().checked_sub(1)?;
    let t = record.times[last];
    let (h, s) = (record.h1_norm[last], record.sup_norm[last]);
    if !(h.is_finite() && s.is_finite() && record.energy[last].is_finite()) {
        return Some((t, BlowupReason::Nan));
    }
    if h > cfg.blowup_gradnorm_factor * record.h1_norm[0] {
        return Some((t, BlowupReason::GradNorm));
    }
    if s > cfg.blowup_amp_factor * record.sup_norm[0] {
        return Some((t, BlowupReason::Amplitude));
    }
    None
}

fn run<F, M, O>(
    initial: &F,
    junction: Junction,
    cfg: &EvolutionConfig,
    p: f64,
    mut measure: M,
    mut observe: O,
) -> Result<Evolution<F>>
where
    F: Evolvable,
    M: FnMut(&F) -> MonitorSample,
    O: FnMut(f64, &F, &MonitorSample),
{
    let grid = *initial.samples().grid();
    cfg.validate(&grid)?;
    if !initial.samples().is_finite() {
        return Err(Error::InvalidField("initial state has non-finite samples".into()));
    }
    let lat = Lattice::new(&grid, junction, cfg.outer_bc)?;
    let mut u = prepare(initial.samples(), cfg.outer_bc);
    let mut dt = cfg.dt;
    let mut stepper = Stepper::new(lat, cfg, p, dt)?;

    let mut record = TrajectoryRecord::default();
    let mut state = F::from_evolved(EdgeSamples::from_flat(grid, u.clone())?)?;
    let first = measure(&state);
    record.push(0.0, dt, &first);
    observe(0.0, &state, &first);
    let h1_0 = first.h1_norm;
    let mut refinements = 0u32;
    let mut t = 0.0f64;
    let eps = 1e-6 * cfg.dt;

    'outer: while cfg.t_end - t > eps {
        for _ in 0..cfg.monitor_stride {
            let remaining = cfg.t_end - t;
            if remaining <= eps {
                break;
            }
            if remaining < stepper.dt * (1.0 - 1e-9) {
                if !stepper.flush(&mut u) {
                    record.blowup_time = Some(t);
                    record.blowup_reason = Some(BlowupReason::Nan);
                    break 'outer;
                }
                stepper.set_dt(remaining)?;
            }
            let h = stepper.dt;
            if !stepper.step(&mut u)? {
                record.blowup_time = Some(t + h);
                record.blowup_reason = Some(BlowupReason::Nan);
                break 'outer;
            }
            t += h;
            record.steps += 1;
        }
        if !stepper.flush(&mut u) || !u.iter().all(|v| v.is_finite()) {
            record.blowup_time = Some(t);
            record.blowup_reason = Some(BlowupReason::Nan);
            break;
        }
        let next = F::from_evolved(EdgeSamples::from_flat(grid, u.clone())?)?;
        let sample = measure(&next);
        record.push(t, stepper.dt, &sample);
        state = next;
        observe(t, &state, &sample);
        if let Some((tb, reason)) = detect_blowup(&record, cfg) {
            record.blowup_time = Some(tb);
            record.blowup_reason = Some(reason);
            break;
        }
        if cfg.refine_on_blowup
            && refinements < cfg.max_refinements
            && sample.h1_norm >= h1_0 * 2f64.powi(refinements as i32 + 1)
        {
            refinements += 1;
            dt *= 0.5;
            log::debug!("t = {t:.6}: H¹ norm {:.3e}, refining to dt = {dt:e}", sample.h1_norm);
            stepper.set_dt(dt)?;
        } else if (stepper.dt - dt).abs() > 1e-15 * dt && cfg.t_end - t > eps {
            stepper.set_dt(dt)?;
        }
    }
    Ok(Evolution { record, final_state: state, final_time: t })
}

/// Integrate NLS-δ from `initial` and monitor every `monitor_stride` steps.
pub fn evolve(initial: &GraphField, cfg: &EvolutionConfig, model: &DeltaModel, omega: f64) -> Result<Evolution<GraphField>> {
    evolve_with(initial, cfg, model, omega, |_, _, _| {})
}

/// [`evolve`] with an observer called on every monitored state.
pub fn evolve_with<O>(
    initial: &GraphField,
    cfg: &EvolutionConfig,
    model: &DeltaModel,
    omega: f64,
    observe: O,
) -> Result<Evolution<GraphField>>
where
    O: FnMut(f64, &GraphField, &MonitorSample),
{
    run(
        initial,
        Junction::Delta { alpha: model.alpha },
        cfg,
        model.p,
        |v: &GraphField| monitor_graph(v, model, omega),
        observe,
    )
}

/// Integrate NLS-δ′ on the line.
pub fn evolve_delta_prime(
    initial: &LineField,
    cfg: &EvolutionConfig,
    model: &DeltaPrimeModel,
    omega: f64,
) -> Result<Evolution<LineField>> {
    evolve_delta_prime_with(initial, cfg, model, omega, |_, _, _| {})
}

pub fn evolve_delta_prime_with<O>(
    initial: &LineField,
    cfg: &EvolutionConfig,
    model: &DeltaPrimeModel,
    omega: f64,
    observe: O,
) -> Result<Evolution<LineField>>
where
    O: FnMut(f64, &LineField, &MonitorSample),
{
    run(
        initial,
        Junction::DeltaPrime { gamma: model.gamma },
        cfg,
        model.p,
        |v: &LineField| monitor_line(v, model, omega),
        observe,
    )
}

/// One step of size `dt` of NLS-δ (split steps are completed, not merged).
pub fn step(state: &GraphField, cfg: &EvolutionConfig, model: &DeltaModel, dt: f64) -> Result<GraphField> {
    let grid = *state.grid();
    let lat = Lattice::new(&grid, Junction::Delta { alpha: model.alpha }, cfg.outer_bc)?;
    let mut u = prepare(state.samples(), cfg.outer_bc);
    let mut stepper = Stepper::new(lat, cfg, model.p, dt)?;
    let ok = stepper.step(&mut u)? && stepper.flush(&mut u);
    if !ok || !u.iter().all(|v| v.is_finite()) {
        return Err(Error::Singular("step produced non-finite values".into()));
    }
    GraphField::from_samples(EdgeSamples::from_flat(grid, u)?)
}
