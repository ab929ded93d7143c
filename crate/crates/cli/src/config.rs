//! `key = value` experiment files merged with command-line overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use graphnls::evolution::Scheme;
use graphnls::Branch;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    Io(String),
    Syntax { line: usize, text: String },
    Missing(String),
    Invalid { key: String, value: String, reason: String },
    Unknown(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Syntax { line, text } => write!(f, "line {line}: expected key = value, got '{text}'"),
            ConfigError::Missing(k) => write!(f, "missing required key '{k}'"),
            ConfigError::Invalid { key, value, reason } => write!(f, "bad value '{value}' for '{key}': {reason}"),
            ConfigError::Unknown(k) => write!(f, "unknown key '{k}'"),
        }
    }
}

impl std::error::Error for ConfigError {}

const KNOWN_KEYS: &[&str] = &[
    "experiment", "n", "alpha", "gamma", "omega", "p", "k", "branch", "length", "points", "h", "dt", "t_end",
    "scheme", "stride", "refine", "lambda", "epsilon", "perturbation", "bump_center", "bump_width", "p_grid",
    "out", "force", "omega_factor", "bump_momentum", "profile_h", "dynamics", "model", "stride_time",
];

/// Short flag spellings accepted as keys.
const ALIASES: &[(&str, &str)] = &[("l", "length"), ("m", "points"), ("n_edges", "n"), ("t", "t_end")];

/// Ordered key/value store; later writes win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax { line: i + 1, text: raw.to_string() });
            };
            let k = k.trim();
            if k.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1, text: raw.to_string() });
            }
            cfg.set(k, v.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Keys are case-insensitive and `-` is read as `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let mut key = key.trim().to_ascii_lowercase().replace('-', "_");
        if let Some((_, to)) = ALIASES.iter().find(|(from, _)| *from == key) {
            key = (*to).to_string();
        }
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::Unknown(key));
        }
        self.values.insert(key, value.trim().to_string());
        Ok(())
    }

    /// Apply `overrides` on top of `self`.
    pub fn merged(mut self, overrides: &Config) -> Self {
        for (k, v) in &overrides.values {
            self.values.insert(k.clone(), v.clone());
        }
        self
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e: T::Err| ConfigError::Invalid {
                key: key.into(),
                value: v.into(),
                reason: e.to_string(),
            }),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.get(key)?.ok_or_else(|| ConfigError::Missing(key.into()))
    }

    /// Comma-separated list of reals.
    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        v.split(',')
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>().map_err(|e| ConfigError::Invalid { key: key.into(), value: v.into(), reason: e.to_string() })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentName {
    VerifyProfile,
    VerifyVirial,
    BlowupScan,
    StabilityDemo,
    ThresholdTable,
    DeltaPrimeSuite,
}

impl FromStr for ExperimentName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "verify_profile" => ExperimentName::VerifyProfile,
            "verify_virial" => ExperimentName::VerifyVirial,
            "blowup_scan" => ExperimentName::BlowupScan,
            "stability_demo" => ExperimentName::StabilityDemo,
            "threshold_table" => ExperimentName::ThresholdTable,
            "delta_prime_suite" => ExperimentName::DeltaPrimeSuite,
            other => return Err(format!("unknown experiment '{other}'")),
        })
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentName::VerifyProfile => "verify_profile",
            ExperimentName::VerifyVirial => "verify_virial",
            ExperimentName::BlowupScan => "blowup_scan",
            ExperimentName::StabilityDemo => "stability_demo",
            ExperimentName::ThresholdTable => "threshold_table",
            ExperimentName::DeltaPrimeSuite => "delta_prime_suite",
        })
    }
}

/// How the initial datum is obtained from the profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    /// `λ^{1/2}Φ(λx)`, one run per λ.
    Scaling,
    /// `(1 + ε)Φ`.
    Multiplicative,
    /// `Φ + ε·exp(−((x − c)/w)²)` on every edge.
    Gaussian,
}

impl FromStr for Perturbation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "scaling" | "lambda" => Perturbation::Scaling,
            "multiplicative" => Perturbation::Multiplicative,
            "gaussian" => Perturbation::Gaussian,
            other => return Err(format!("unknown perturbation '{other}'")),
        })
    }
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Perturbation::Scaling => "scaling",
            Perturbation::Multiplicative => "multiplicative",
            Perturbation::Gaussian => "gaussian",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub n_edges: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub omega: f64,
    pub p: f64,
    pub k: usize,
    pub branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerics {
    /// Edge length; `None` picks the profile's default truncation (at least 40).
    pub length: Option<f64>,
    /// Grid spacing, unless `points` is given.
    pub h: f64,
    pub points: Option<usize>,
    pub dt: f64,
    pub t_end: Option<f64>,
    pub scheme: Scheme,
    /// Steps between monitor samples.
    pub stride: usize,
    pub refine: bool,
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: ExperimentName,
    pub model: ModelParams,
    pub numerics: Numerics,
    pub perturbation: Perturbation,
    pub lambdas: Vec<f64>,
    pub epsilon: f64,
    pub bump_center: f64,
    pub bump_width: f64,
    /// Phase `e^{ikx}` carried by the Gaussian bump.
    pub bump_momentum: f64,
    /// Frequency as a multiple of the instability threshold, overriding `omega`.
    pub omega_factor: Option<f64>,
    /// Spacing for profile residual checks.
    pub profile_h: f64,
    /// Run the time-dependent part of a suite.
    pub dynamics: bool,
    pub p_grid: Vec<f64>,
    pub out: Option<PathBuf>,
    pub force: bool,
}

fn invalid(key: &str, value: impl fmt::Display, reason: &str) -> ConfigError {
    ConfigError::Invalid { key: key.into(), value: value.to_string(), reason: reason.into() }
}

fn parse_with<T>(cfg: &Config, key: &str, default: T, parse: impl Fn(&str) -> Result<T, String>) -> Result<T, ConfigError> {
    match cfg.raw(key) {
        None => Ok(default),
        Some(v) => parse(v).map_err(|e| invalid(key, v, &e)),
    }
}

impl ExperimentSpec {
    /// Resolve `cfg` for experiment `name`, with per-experiment defaults.
    pub fn from_config(name: ExperimentName, cfg: &Config) -> Result<Self, ConfigError> {
        let defaults = Defaults::for_experiment(name);
        let model = ModelParams {
            n_edges: cfg.get_or("n", 3usize)?,
            alpha: cfg.get_or("alpha", defaults.alpha)?,
            gamma: cfg.get_or("gamma", 2.0)?,
            omega: cfg.get_or("omega", defaults.omega)?,
            p: cfg.get_or("p", defaults.p)?,
            k: cfg.get_or("k", 0usize)?,
            branch: parse_with(cfg, "branch", Branch::Odd, |v| v.parse::<Branch>().map_err(|e| e.to_string()))?,
        };
        let scheme = parse_with(cfg, "scheme", defaults.scheme, |v| v.parse::<Scheme>().map_err(|e| e.to_string()))?;
        let h: f64 = cfg.get_or("h", defaults.h)?;
        let dt_default = match scheme {
            Scheme::StrangSplit => defaults.dt.min(0.25 * h * h),
            Scheme::CrankNicolsonRelaxed => defaults.dt,
        };
        let dt: f64 = cfg.get_or("dt", dt_default)?;
        if !(h > 0.0 && dt > 0.0) {
            return Err(invalid("h/dt", format!("{h}/{dt}"), "must be positive"));
        }
        let stride_time: f64 = cfg.get_or("stride_time", defaults.stride_time)?;
        let stride = match cfg.get::<usize>("stride")? {
            Some(s) => s,
            None => (stride_time / dt).round().max(1.0) as usize,
        };
        if stride == 0 {
            return Err(invalid("stride", 0, "must be at least 1"));
        }
        let numerics = Numerics {
            length: cfg.get("length")?,
            h,
            points: cfg.get("points")?,
            dt,
            t_end: cfg.get("t_end")?,
            scheme,
            stride,
            refine: cfg.get_or("refine", defaults.refine)?,
        };
        let lambdas = cfg.list("lambda")?.unwrap_or_else(|| defaults.lambdas.to_vec());
        if lambdas.is_empty() || lambdas.iter().any(|l| !(*l > 0.0)) {
            return Err(invalid("lambda", format!("{lambdas:?}"), "need positive scaling factors"));
        }
        Ok(Self {
            name,
            model,
            numerics,
            perturbation: parse_with(cfg, "perturbation", defaults.perturbation, |v| v.parse())?,
            lambdas,
            epsilon: cfg.get_or("epsilon", defaults.epsilon)?,
            bump_center: cfg.get_or("bump_center", 3.0)?,
            bump_width: cfg.get_or("bump_width", 1.0)?,
            bump_momentum: cfg.get_or("bump_momentum", 1.0)?,
            omega_factor: cfg.get("omega_factor")?,
            profile_h: cfg.get_or("profile_h", defaults.profile_h)?,
            dynamics: cfg.get_or("dynamics", true)?,
            p_grid: cfg.list("p_grid")?.unwrap_or_else(|| vec![5.1, 5.5, 6.0, 7.0, 9.0, 12.0, 20.0, 50.0, 200.0]),
            out: cfg.get("out")?,
            force: cfg.get_or("force", false)?,
        })
    }

    /// `# key=value` header lines describing the resolved run.
    pub fn metadata(&self) -> Vec<(String, String)> {
        let m = &self.model;
        let n = &self.numerics;
        let mut out = vec![
            ("version".to_string(), crate::VERSION.to_string()),
            ("experiment".into(), self.name.to_string()),
            ("n".into(), m.n_edges.to_string()),
            ("alpha".into(), m.alpha.to_string()),
            ("gamma".into(), m.gamma.to_string()),
            ("omega".into(), m.omega.to_string()),
            ("p".into(), m.p.to_string()),
            ("k".into(), m.k.to_string()),
            ("branch".into(), format!("{:?}", m.branch).to_ascii_lowercase()),
            ("length".into(), n.length.map_or("auto".into(), |l| l.to_string())),
            ("h".into(), n.h.to_string()),
            ("points".into(), n.points.map_or("auto".into(), |p| p.to_string())),
            ("dt".into(), n.dt.to_string()),
            ("t_end".into(), n.t_end.map_or("auto".into(), |t| t.to_string())),
            ("scheme".into(), format!("{:?}", n.scheme)),
            ("stride".into(), n.stride.to_string()),
            ("refine".into(), n.refine.to_string()),
            ("perturbation".into(), self.perturbation.to_string()),
            ("lambda".into(), join(&self.lambdas)),
            ("epsilon".into(), self.epsilon.to_string()),
            ("omega_factor".into(), self.omega_factor.map_or("none".into(), |f| f.to_string())),
            ("force".into(), self.force.to_string()),
        ];
        if self.name == ExperimentName::ThresholdTable {
            out.push(("p_grid".into(), join(&self.p_grid)));
        }
        out
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

struct Defaults {
    alpha: f64,
    omega: f64,
    p: f64,
    h: f64,
    dt: f64,
    scheme: Scheme,
    refine: bool,
    perturbation: Perturbation,
    lambdas: &'static [f64],
    epsilon: f64,
    stride_time: f64,
    profile_h: f64,
}

impl Defaults {
    fn for_experiment(name: ExperimentName) -> Self {
        let base = Defaults {
            alpha: -1.0,
            omega: 2.0,
            p: 3.0,
            h: 0.01,
            dt: 2.5e-5,
            scheme: Scheme::StrangSplit,
            refine: false,
            perturbation: Perturbation::Scaling,
            lambdas: &[1.1],
            epsilon: 0.01,
            stride_time: 1e-3,
            profile_h: 2.5e-4,
        };
        match name {
            ExperimentName::VerifyProfile => Defaults { h: 2.5e-4, ..base },
            ExperimentName::VerifyVirial => {
                Defaults { perturbation: Perturbation::Gaussian, epsilon: 1.0, stride_time: 0.01, ..base }
            }
            ExperimentName::BlowupScan => Defaults { alpha: 1.0, p: 6.0, refine: true, lambdas: &[1.05, 1.1, 1.2], ..base },
            ExperimentName::StabilityDemo => Defaults {
                alpha: -2.0,
                dt: 1e-3,
                scheme: Scheme::CrankNicolsonRelaxed,
                perturbation: Perturbation::Multiplicative,
                stride_time: 0.1,
                ..base
            },
            ExperimentName::ThresholdTable => Defaults { p: 7.0, ..base },
            ExperimentName::DeltaPrimeSuite => Defaults {
                omega: 5.0,
                p: 7.0,
                h: 0.005,
                refine: true,
                stride_time: 2.5e-4,
                // the asymmetric peak at p = 7 needs the finer grid for a 1e-5 residual
                profile_h: 1.25e-4,
                ..base
            },
        }
    }
}
