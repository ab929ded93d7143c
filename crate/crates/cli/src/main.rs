use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use graphnls::evolution::{evolve, evolve_delta_prime, Evolution, EvolutionConfig, Scheme};
use graphnls::functionals::{instability_threshold, DeltaModel, DeltaPrimeModel, FunctionalReport, ThresholdMode};
use graphnls::snapshot::{read_graph_field, read_line_field, write_graph_field, write_line_field};
use graphnls::{
    build_profile_delta, build_profile_delta_prime, delta_prime_residuals, delta_residuals, DeltaPrimeParams, GraphField, LineField, Scalable, StarGraphGrid,
    WaveParams,
};
use graphnls_cli::experiments::{
    run_blowup_scan, run_delta_prime_suite, run_stability_demo, run_threshold_table, run_verify_profile,
    run_verify_virial, ExperimentError,
};
use graphnls_cli::output::{num, with_metadata, Table};
use graphnls_cli::{Config, ConfigError, ExperimentName, ExperimentSpec};

/// Exit status of `evolve` when the blow-up flag was raised.
const EXIT_BLOWUP: u8 = 4;

#[derive(Parser)]
#[command(name = "graphnls", version, about = "NLS with point interactions on star graphs and the line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a standing wave and report its residuals.
    Profile(Params),
    /// Functionals of a snapshot as a one-line CSV.
    Functionals(SnapshotArgs),
    /// Threshold ξ and frequency for one p, or a table over --p-grid.
    Threshold(Params),
    /// Integrate the flow from a snapshot or a (scaled) profile.
    Evolve(EvolveArgs),
    /// Blow-up of λ-scaled standing waves.
    Blowup(Params),
    /// Perturbed standing wave in the stable regime.
    Stability(Params),
    /// δ′ profiles, roots and blow-up runs.
    Deltaprime(Params),
    /// Run the experiment named by `experiment` and fail on any check.
    Verify(Params),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    Delta,
    Deltaprime,
}

#[derive(Args, Clone)]
struct Params {
    /// key = value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra key=value overrides.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, value_enum, default_value = "delta")]
    model: Model,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    omega_factor: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    branch: Option<String>,
    #[arg(long = "L")]
    length: Option<f64>,
    #[arg(long = "M")]
    points: Option<usize>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    stride: Option<usize>,
    /// Comma-separated scaling factors.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<f64>,
    #[arg(long)]
    perturbation: Option<String>,
    #[arg(long)]
    p_grid: Option<String>,
    /// Output file (CSV, or snapshot for `profile`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run even when the parameters violate the regime hypotheses.
    #[arg(long)]
    force: bool,
}

impl Params {
    fn config(&self) -> Result<Config, ConfigError> {
        let base = match &self.config {
            Some(p) => Config::from_file(p)?,
            None => Config::default(),
        };
        let mut flags = Config::default();
        let mut put = |k: &str, v: Option<String>| -> Result<(), ConfigError> {
            match v {
                Some(v) => flags.set(k, &v),
                None => Ok(()),
            }
        };
        let s = |x: Option<f64>| x.map(|v| v.to_string());
        put("n", self.n.map(|v| v.to_string()))?;
        put("alpha", s(self.alpha))?;
        put("gamma", s(self.gamma))?;
        put("omega", s(self.omega))?;
        put("omega_factor", s(self.omega_factor))?;
        put("p", s(self.p))?;
        put("k", self.k.map(|v| v.to_string()))?;
        put("branch", self.branch.clone())?;
        put("length", s(self.length))?;
        put("points", self.points.map(|v| v.to_string()))?;
        put("h", s(self.h))?;
        put("dt", s(self.dt))?;
        put("t_end", s(self.t_end))?;
        put("scheme", self.scheme.clone())?;
        put("stride", self.stride.map(|v| v.to_string()))?;
        put("lambda", self.lambda.clone())?;
        put("epsilon", s(self.epsilon))?;
        put("perturbation", self.perturbation.clone())?;
        put("p_grid", self.p_grid.clone())?;
        put("out", self.out.as_ref().map(|p| p.display().to_string()))?;
        if self.force {
            put("force", Some("true".into()))?;
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: 0, text: kv.clone() })?;
            flags.set(k, v)?;
        }
        Ok(base.merged(&flags))
    }

    fn spec(&self, name: ExperimentName) -> Result<ExperimentSpec, ConfigError> {
        ExperimentSpec::from_config(name, &self.config()?)
    }
}

#[derive(Args)]
struct SnapshotArgs {
    #[command(flatten)]
    params: Params,
    #[arg(long)]
    snapshot: PathBuf,
}

#[derive(Args)]
struct EvolveArgs {
    #[command(flatten)]
    params: Params,
    /// Initial state from a snapshot file.
    #[arg(long, conflicts_with = "profile")]
    snapshot: Option<PathBuf>,
    /// Initial state from the profile given by the model flags.
    #[arg(long)]
    profile: bool,
    /// Halve dt every time the H¹ norm doubles.
    #[arg(long)]
    refine: bool,
    #[arg(long)]
    out_series: Option<PathBuf>,
    #[arg(long)]
    out_final: Option<PathBuf>,
}

/// What went wrong, mapped to the exit status.
enum Failure {
    Config(anyhow::Error),
    Numerical(anyhow::Error),
    Check(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Check(_) => 3,
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e.exit_code() {
            1 => Failure::Config(e.into()),
            3 => Failure::Check(e.to_string()),
            _ => Failure::Numerical(e.into()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.into())
    }
}

/// Replace `key` in `meta`, or append it.
fn set_meta(meta: &mut Vec<(String, String)>, key: &str, value: impl ToString) {
    match meta.iter_mut().find(|(k, _)| k == key) {
        Some(slot) => slot.1 = value.to_string(),
        None => meta.push((key.to_string(), value.to_string())),
    }
}

fn core_err(e: graphnls::Error) -> Failure {
    ExperimentError::from(e).into()
}

fn io_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            match &f {
                Failure::Config(e) | Failure::Numerical(e) => eprintln!("error: {e:#}"),
                Failure::Check(m) => eprintln!("FAILED: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

/// Print `table` and write it to `out` if set.
fn emit(table: &Table, out: Option<&Path>) -> Result<(), Failure> {
    let csv = table.to_csv();
    print!("{csv}");
    if let Some(path) = out {
        std::fs::write(path, csv).with_context(|| format!("writing {}", path.display())).map_err(io_err)?;
    }
    Ok(())
}

fn dispatch(cmd: Command) -> Result<u8, Failure> {
    match cmd {
        Command::Profile(p) => profile(&p),
        Command::Functionals(p) => functionals(&p),
        Command::Threshold(p) => threshold(&p),
        Command::Evolve(a) => evolve_cmd(&a),
        Command::Blowup(p) => {
            let spec = p.spec(ExperimentName::BlowupScan)?;
            let r = run_blowup_scan(&spec)?;
            emit(&r.table(), spec.out.as_deref())?;
            Ok(0)
        }
        Command::Stability(p) => {
            let spec = p.spec(ExperimentName::StabilityDemo)?;
            let r = run_stability_demo(&spec)?;
            emit(&r.table(), spec.out.as_deref())?;
            Ok(0)
        }
        Command::Deltaprime(p) => {
            let spec = p.spec(ExperimentName::DeltaPrimeSuite)?;
            let r = run_delta_prime_suite(&spec)?;
            emit(&r.table(), spec.out.as_deref())?;
            Ok(0)
        }
        Command::Verify(p) => verify(&p),
    }
}

fn verify(p: &Params) -> Result<u8, Failure> {
    let cfg = p.config()?;
    let name: ExperimentName = match cfg.raw("experiment") {
        Some(v) => v.parse().map_err(|e: String| Failure::Config(anyhow::anyhow!(e)))?,
        None => ExperimentName::VerifyProfile,
    };
    let spec = ExperimentSpec::from_config(name, &cfg)?;
    let out = spec.out.as_deref();
    let (table, passed) = match name {
        ExperimentName::VerifyProfile => {
            let r = run_verify_profile(&spec)?;
            (r.table(), r.passed())
        }
        ExperimentName::VerifyVirial => {
            let r = run_verify_virial(&spec)?;
            (r.report.table(), r.report.passed())
        }
        ExperimentName::BlowupScan => {
            let r = run_blowup_scan(&spec)?;
            (r.table(), r.passed())
        }
        ExperimentName::StabilityDemo => {
            let r = run_stability_demo(&spec)?;
            (r.table(), r.passed())
        }
        ExperimentName::ThresholdTable => {
            let r = run_threshold_table(&spec)?;
            (r.table(), r.passed())
        }
        ExperimentName::DeltaPrimeSuite => {
            let r = run_delta_prime_suite(&spec)?;
            (r.table(), r.passed())
        }
    };
    emit(&table, out)?;
    if passed {
        Ok(0)
    } else {
        Err(Failure::Check(format!("{name}: at least one check failed")))
    }
}

fn profile(p: &Params) -> Result<u8, Failure> {
    let mut cfg = p.config()?;
    if cfg.raw("h").is_none() {
        cfg.set("h", "0.01")?;
    }
    let spec = ExperimentSpec::from_config(ExperimentName::VerifyProfile, &cfg)?;
    let m = spec.model;
    let n = spec.numerics;
    let mut meta = spec.metadata();
    set_meta(&mut meta, "experiment", "profile");
    set_meta(&mut meta, "model", if p.model == Model::Delta { "delta" } else { "deltaprime" });
    let mut table = Table::new(meta, &["quantity", "value"]);
    let grid_for = |edges: usize, default_len: f64| -> Result<StarGraphGrid, Failure> {
        let length = n.length.unwrap_or(default_len);
        match n.points {
            Some(pts) => StarGraphGrid::new(edges, length, pts),
            None => StarGraphGrid::with_spacing(edges, length, n.h),
        }
        .map_err(core_err)
    };
    match p.model {
        Model::Delta => {
            let w = WaveParams::new(m.n_edges, m.alpha, m.omega, m.p, m.k).map_err(core_err)?;
            let grid = grid_for(m.n_edges, w.default_length())?;
            let phi = build_profile_delta(&w, &grid).map_err(core_err)?;
            let r = delta_residuals(&w, &phi);
            let rep = DeltaModel::new(m.alpha, m.p).map_err(core_err)?.report(&phi, m.omega);
            push_profile_rows(&mut table, &grid, r.stationary, r.continuity, r.vertex, &rep);
            if let Some(out) = &spec.out {
                write_graph_field(out, &phi).map_err(core_err)?;
            }
        }
        Model::Deltaprime => {
            let w = DeltaPrimeParams::new(m.gamma, m.omega, m.p, m.branch).map_err(core_err)?;
            let grid = grid_for(2, w.default_length())?;
            let phi = build_profile_delta_prime(&w, &grid).map_err(core_err)?;
            let r = delta_prime_residuals(&w, &phi);
            let rep = DeltaPrimeModel::new(m.gamma, m.p).map_err(core_err)?.report(&phi, m.omega);
            push_profile_rows(&mut table, &grid, r.stationary, r.continuity, r.vertex, &rep);
            if let Some(out) = &spec.out {
                write_line_field(out, &phi).map_err(core_err)?;
            }
        }
    }
    print!("{}", table.to_csv());
    Ok(0)
}

fn push_profile_rows(t: &mut Table, g: &StarGraphGrid, stat: f64, cont: f64, vertex: f64, r: &FunctionalReport) {
    let rows = [
        ("points", g.n_points() as f64),
        ("h", g.h()),
        ("stationary_residual", stat),
        ("continuity_residual", cont),
        ("vertex_residual", vertex),
        ("mass", r.mass),
        ("energy", r.energy),
        ("action", r.action),
        ("nehari", r.nehari),
        ("virial", r.virial_p),
    ];
    for (k, v) in rows {
        t.push(vec![k.into(), num(v)]);
    }
}

enum Snapshot {
    Graph(GraphField),
    Line(LineField),
}

fn read_snapshot(path: &Path) -> Result<Snapshot, Failure> {
    match read_graph_field(path) {
        Ok(g) => Ok(Snapshot::Graph(g)),
        Err(graphnls::Error::Format(_)) => read_line_field(path).map(Snapshot::Line).map_err(core_err),
        Err(e) => Err(core_err(e)),
    }
}

fn functionals(a: &SnapshotArgs) -> Result<u8, Failure> {
    let spec = a.params.spec(ExperimentName::VerifyProfile)?;
    let m = spec.model;
    let path = &a.snapshot;
    let rep = match read_snapshot(path)? {
        Snapshot::Graph(g) => DeltaModel::new(m.alpha, m.p).map_err(core_err)?.report(&g, m.omega),
        Snapshot::Line(l) => DeltaPrimeModel::new(m.gamma, m.p).map_err(core_err)?.report(&l, m.omega),
    };
    let mut meta = spec.metadata();
    set_meta(&mut meta, "experiment", "functionals");
    set_meta(&mut meta, "snapshot", path.display());
    let mut t = Table::new(meta, &["mass", "energy", "action", "I", "P", "vertex_abs2"]);
    t.push([rep.mass, rep.energy, rep.action, rep.nehari, rep.virial_p, rep.vertex_abs2].map(num).to_vec());
    emit(&t, spec.out.as_deref())?;
    Ok(0)
}

fn threshold(p: &Params) -> Result<u8, Failure> {
    let cfg = p.config()?;
    let spec = ExperimentSpec::from_config(ExperimentName::ThresholdTable, &cfg)?;
    if cfg.raw("p_grid").is_some() || cfg.raw("p").is_none() {
        let r = run_threshold_table(&spec)?;
        emit(&r.table(), spec.out.as_deref())?;
        return Ok(0);
    }
    let m = spec.model;
    let mode = match (p.model, cfg.raw("gamma")) {
        (Model::Deltaprime, _) | (_, Some(_)) => ThresholdMode::DeltaPrime { gamma: m.gamma },
        _ => ThresholdMode::DeltaGraph { alpha: m.alpha, n_edges: m.n_edges },
    };
    let r = instability_threshold(m.p, mode).map_err(core_err)?;
    let mut meta = spec.metadata();
    set_meta(&mut meta, "experiment", "threshold");
    let mut t = Table::new(meta, &["p", "xi", "omega_star", "residual", "sign_changes"]);
    t.push(vec![m.p.to_string(), num(r.xi), num(r.omega_star), num(r.residual), r.sign_changes.to_string()]);
    emit(&t, spec.out.as_deref())?;
    Ok(0)
}

fn evolve_cmd(a: &EvolveArgs) -> Result<u8, Failure> {
    let mut cfg = a.params.config()?;
    if a.refine {
        cfg.set("refine", "true")?;
    }
    let spec = ExperimentSpec::from_config(ExperimentName::StabilityDemo, &cfg)?;
    // the stability demo defaults to Crank–Nicolson and λ = 1.1; evolve does not
    let scheme = if cfg.raw("scheme").is_some() { spec.numerics.scheme } else { Scheme::StrangSplit };
    let lambda = match cfg.list("lambda")? {
        Some(l) if l.len() == 1 => l[0],
        Some(l) => return Err(Failure::Config(anyhow::anyhow!("evolve takes a single lambda, got {l:?}"))),
        None => 1.0,
    };
    evolve_with_scheme(a, &spec, scheme, lambda)
}

fn evolve_with_scheme(a: &EvolveArgs, spec: &ExperimentSpec, scheme: Scheme, lambda: f64) -> Result<u8, Failure> {
    let m = spec.model;
    let n = spec.numerics;
    let dt = match (a.params.dt, scheme) {
        (Some(dt), _) => dt,
        (None, Scheme::StrangSplit) => n.dt.min(0.25 * n.h * n.h),
        (None, Scheme::CrankNicolsonRelaxed) => n.dt,
    };
    let cfg = EvolutionConfig {
        dt,
        t_end: n.t_end.unwrap_or(1.0),
        scheme,
        refine_on_blowup: n.refine,
        monitor_stride: a.params.stride.unwrap_or(100),
        ..EvolutionConfig::default()
    };
    let initial = match (&a.snapshot, a.profile) {
        (Some(path), _) => read_snapshot(path)?,
        (None, true) => {
            let len = |d: f64| n.length.unwrap_or(d.max(40.0));
            match a.params.model {
                Model::Delta => {
                    let w = WaveParams::new(m.n_edges, m.alpha, m.omega, m.p, m.k).map_err(core_err)?;
                    let g = StarGraphGrid::with_spacing(m.n_edges, len(w.default_length()), n.h).map_err(core_err)?;
                    Snapshot::Graph(build_profile_delta(&w, &g).map_err(core_err)?)
                }
                Model::Deltaprime => {
                    let w = DeltaPrimeParams::new(m.gamma, m.omega, m.p, m.branch).map_err(core_err)?;
                    let g = StarGraphGrid::with_spacing(2, len(w.default_length()), n.h).map_err(core_err)?;
                    Snapshot::Line(build_profile_delta_prime(&w, &g).map_err(core_err)?)
                }
            }
        }
        (None, false) => return Err(Failure::Config(anyhow::anyhow!("give --snapshot <file> or --profile"))),
    };
    let mut meta = spec.metadata();
    set_meta(&mut meta, "experiment", "evolve");
    set_meta(&mut meta, "scheme", format!("{scheme:?}"));
    set_meta(&mut meta, "dt", dt);
    set_meta(&mut meta, "stride", cfg.monitor_stride);
    set_meta(&mut meta, "t_end", cfg.t_end);
    set_meta(&mut meta, "lambda", lambda);
    if let Some(path) = &a.snapshot {
        set_meta(&mut meta, "snapshot", path.display());
    }
    match initial {
        Snapshot::Graph(g) => {
            let u0 = g.scale(lambda).map_err(core_err)?;
            let model = DeltaModel::new(m.alpha, m.p).map_err(core_err)?;
            let out = evolve(&u0, &cfg, &model, m.omega).map_err(core_err)?;
            finish(a, &meta, &out, |path| write_graph_field(path, &out.final_state))
        }
        Snapshot::Line(l) => {
            let u0 = l.scale(lambda).map_err(core_err)?;
            let model = DeltaPrimeModel::new(m.gamma, m.p).map_err(core_err)?;
            let out = evolve_delta_prime(&u0, &cfg, &model, m.omega).map_err(core_err)?;
            finish(a, &meta, &out, |path| write_line_field(path, &out.final_state))
        }
    }
}

fn finish<F>(
    a: &EvolveArgs,
    meta: &[(String, String)],
    out: &Evolution<F>,
    write_final: impl Fn(&Path) -> graphnls::Result<()>,
) -> Result<u8, Failure> {
    let rec = &out.record;
    let mut meta = meta.to_vec();
    meta.push(("final_time".into(), out.final_time.to_string()));
    meta.push(("blowup_time".into(), rec.blowup_time.map_or("none".into(), |t| t.to_string())));
    meta.push(("blowup_reason".into(), rec.blowup_reason.map_or("none".into(), |r| r.to_string())));
    let csv = with_metadata(&meta, &rec.to_csv());
    match &a.out_series {
        Some(path) => std::fs::write(path, &csv).with_context(|| format!("writing {}", path.display())).map_err(io_err)?,
        None => print!("{csv}"),
    }
    if let Some(path) = &a.out_final {
        write_final(path).map_err(core_err)?;
    }
    match rec.blowup_reason {
        None => Ok(0),
        Some(graphnls::evolution::BlowupReason::Nan) => {
            eprintln!("numerical failure: non-finite state at t = {:?}", rec.blowup_time);
            Ok(2)
        }
        Some(r) => {
            eprintln!("blow-up flagged ({r}) at t = {:?}", rec.blowup_time);
            Ok(EXIT_BLOWUP)
        }
    }
}

