//! Run configuration: a line-based `key = value` format with `[section]`
//! headers (a TOML subset), environment overrides and validation.
//!
//! ```text
//! [system]
//! n = 100
//! t_end = 1.0
//! seed = 1
//!
//! [kernel]
//! gamma = 0.0
//! nu = 0.5
//! theta_min = 0.1
//! rho = 1.0
//! ```
//!
//! Every other key has a default; see [`RunConfig::to_text`] for the full
//! list. Any key can be overridden from the environment as
//! `ENSKOG_<SECTION>_<KEY>`, e.g. `ENSKOG_KERNEL_GAMMA=0.5`.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use enskog_core::bounds::Regime;
use enskog_core::kernels::{
    AngularMeasure, KernelSuite, Level, SpatialKernel, Truncation, TruncationMode, VelocityKernel,
};
use enskog_core::observables::{Monomial, TestFunction};
use enskog_core::particles::{InitialLaw, SimConfig};
use enskog_core::Vector;
use toml::{Table, Value};

use crate::error::ConfigError;

/// Prefix of environment overrides.
pub const ENV_PREFIX: &str = "ENSKOG_";

const SECTIONS: [&str; 5] = ["experiment", "system", "kernel", "initial", "diagnostics"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Run,
    Sweep,
    Residual,
    Povzner,
    Chaos,
    Envelope,
}

impl ExperimentKind {
    const NAMES: [(&'static str, Self); 6] = [
        ("run", Self::Run),
        ("sweep", Self::Sweep),
        ("residual", Self::Residual),
        ("povzner", Self::Povzner),
        ("chaos", Self::Chaos),
        ("envelope", Self::Envelope),
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaKind {
    PowerLaw,
    Maxwellian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationKind {
    /// Energy ball for `γ > 0`, pairwise clip otherwise.
    Auto,
    EnergyBall,
    PairwiseClip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawKind {
    Gaussian,
    UniformBall,
    PointMass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiKind {
    Bump,
    Momentum,
    Energy,
    Position,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeKind {
    /// Picked from `γ`.
    Auto,
    SoftExponential,
    SoftPolynomial,
    HardSubcritical,
    HardSup,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub out: PathBuf,
    /// Seeds for sweeps and multi-run experiments; defaults to the system seed.
    pub seeds: Vec<u64>,
    /// Particle counts for sweeps; defaults to the system `n`.
    pub ns: Vec<usize>,
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub d: usize,
    pub n: usize,
    pub t_end: f64,
    pub seed: u64,
    /// Spacing of snapshot times; snapshots are taken at `k·dt ≤ t_end` and
    /// at `t_end`.
    pub checkpoint_dt: f64,
    pub record_events: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelConfig {
    pub sigma: SigmaKind,
    pub gamma: f64,
    pub c_sigma: f64,
    pub nu: f64,
    pub theta_min: f64,
    pub rho: f64,
    pub truncation: TruncationKind,
    /// Fixed truncation level; automatic when absent.
    pub level: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialConfig {
    pub law: LawKind,
    pub position_scale: f64,
    pub temperature: f64,
    pub radius: f64,
    /// Point-mass velocity (its position is the origin).
    pub velocity: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsConfig {
    pub moments: Vec<f64>,
    pub psi: PsiKind,
    pub psi_radius: f64,
    pub psi_scale: f64,
    pub theta_nodes: usize,
    pub xi_nodes: usize,
    pub povzner_p: Vec<u32>,
    pub povzner_samples: usize,
    pub tagged_paths: usize,
    pub regime: RegimeKind,
    pub envelope_p: f64,
    /// Seeds used to calibrate envelopes; validation uses `experiment.seeds`.
    pub calibration_seeds: Vec<u64>,
}

/// A validated experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub system: SystemConfig,
    pub kernel: KernelConfig,
    pub initial: InitialConfig,
    pub diagnostics: DiagnosticsConfig,
}

/// Collects every problem found while reading a table.
struct Reader<'a> {
    table: &'a Table,
    errors: Vec<String>,
}

impl<'a> Reader<'a> {
    fn section(&mut self, name: &str) -> Option<&'a Table> {
        match self.table.get(name) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.errors.push(format!("[{name}] must be a section"));
                None
            }
        }
    }

    fn raw(&mut self, section: &str, key: &str) -> Option<&'a Value> {
        self.section(section).and_then(|t| t.get(key))
    }

    fn float(&mut self, section: &str, key: &str, default: Option<f64>) -> f64 {
        match self.raw(section, key) {
            Some(Value::Float(x)) => *x,
            Some(Value::Integer(i)) => *i as f64,
            Some(_) => {
                self.errors
                    .push(format!("{section}.{key} must be a number"));
                f64::NAN
            }
            None => self.missing(section, key, default, f64::NAN),
        }
    }

    fn integer(&mut self, section: &str, key: &str, default: Option<i64>) -> i64 {
        match self.raw(section, key) {
            Some(Value::Integer(i)) => *i,
            Some(_) => {
                self.errors
                    .push(format!("{section}.{key} must be an integer"));
                0
            }
            None => self.missing(section, key, default, 0),
        }
    }

    fn unsigned(&mut self, section: &str, key: &str, default: Option<i64>) -> u64 {
        let i = self.integer(section, key, default);
        if i < 0 {
            self.errors
                .push(format!("{section}.{key} must be nonnegative"));
        }
        i.max(0) as u64
    }

    fn boolean(&mut self, section: &str, key: &str, default: bool) -> bool {
        match self.raw(section, key) {
            Some(Value::Boolean(b)) => *b,
            Some(_) => {
                self.errors
                    .push(format!("{section}.{key} must be true or false"));
                default
            }
            None => default,
        }
    }

    fn string(&mut self, section: &str, key: &str, default: &str) -> String {
        match self.raw(section, key) {
            Some(Value::String(s)) => s.clone(),
            Some(_) => {
                self.errors
                    .push(format!("{section}.{key} must be a string"));
                default.to_string()
            }
            None => default.to_string(),
        }
    }

    fn choice<T: Copy>(
        &mut self,
        section: &str,
        key: &str,
        default: &str,
        names: &[(&str, T)],
    ) -> T {
        let s = self.string(section, key, default);
        match names.iter().find(|(name, _)| *name == s) {
            Some((_, v)) => *v,
            None => {
                let allowed: Vec<&str> = names.iter().map(|(n, _)| *n).collect();
                self.errors.push(format!(
                    "{section}.{key} = \"{s}\" is not one of: {}",
                    allowed.join(", ")
                ));
                names[0].1
            }
        }
    }

    fn list<T>(
        &mut self,
        section: &str,
        key: &str,
        item: impl Fn(&Value) -> Option<T>,
    ) -> Option<Vec<T>> {
        match self.raw(section, key) {
            None => None,
            Some(Value::Array(items)) => {
                let parsed: Option<Vec<T>> = items.iter().map(&item).collect();
                if parsed.is_none() {
                    self.errors
                        .push(format!("{section}.{key} has an entry of the wrong type"));
                }
                parsed
            }
            Some(_) => {
                self.errors.push(format!("{section}.{key} must be a list"));
                None
            }
        }
    }

    fn missing<T>(&mut self, section: &str, key: &str, default: Option<T>, filler: T) -> T {
        match default {
            Some(d) => d,
            None => {
                self.errors
                    .push(format!("missing required key {section}.{key}"));
                filler
            }
        }
    }

    fn check(&mut self, ok: bool, message: impl FnOnce() -> String) {
        if !ok {
            self.errors.push(message());
        }
    }
}

fn as_float(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn as_unsigned(v: &Value) -> Option<u64> {
    match v {
        Value::Integer(i) if *i >= 0 => Some(*i as u64),
        _ => None,
    }
}

const KNOWN_KEYS: [(&str, &[&str]); 5] = [
    ("experiment", &["kind", "out", "seeds", "ns", "jobs"]),
    (
        "system",
        &["d", "n", "t_end", "seed", "checkpoint_dt", "record_events"],
    ),
    (
        "kernel",
        &[
            "sigma",
            "gamma",
            "c_sigma",
            "nu",
            "theta_min",
            "rho",
            "truncation",
            "level",
        ],
    ),
    (
        "initial",
        &["law", "position_scale", "temperature", "radius", "velocity"],
    ),
    (
        "diagnostics",
        &[
            "moments",
            "psi",
            "psi_radius",
            "psi_scale",
            "theta_nodes",
            "xi_nodes",
            "povzner_p",
            "povzner_samples",
            "tagged_paths",
            "regime",
            "envelope_p",
            "calibration_seeds",
        ],
    ),
];

const SIGMA_NAMES: [(&str, SigmaKind); 2] = [
    ("power-law", SigmaKind::PowerLaw),
    ("maxwellian", SigmaKind::Maxwellian),
];
const TRUNCATION_NAMES: [(&str, TruncationKind); 3] = [
    ("auto", TruncationKind::Auto),
    ("energy-ball", TruncationKind::EnergyBall),
    ("pairwise-clip", TruncationKind::PairwiseClip),
];
const LAW_NAMES: [(&str, LawKind); 3] = [
    ("gaussian", LawKind::Gaussian),
    ("uniform-ball", LawKind::UniformBall),
    ("point-mass", LawKind::PointMass),
];
const PSI_NAMES: [(&str, PsiKind); 4] = [
    ("bump", PsiKind::Bump),
    ("momentum", PsiKind::Momentum),
    ("energy", PsiKind::Energy),
    ("position", PsiKind::Position),
];
const REGIME_NAMES: [(&str, RegimeKind); 5] = [
    ("auto", RegimeKind::Auto),
    ("soft-exponential", RegimeKind::SoftExponential),
    ("soft-polynomial", RegimeKind::SoftPolynomial),
    ("hard-subcritical", RegimeKind::HardSubcritical),
    ("hard-sup", RegimeKind::HardSup),
];

fn name_of<T: PartialEq + Copy>(names: &[(&'static str, T)], v: T) -> &'static str {
    names.iter().find(|(_, x)| *x == v).map_or("?", |(n, _)| n)
}

/// Parses and validates a configuration, reporting every violation.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::new(vec![format!("syntax: {}", e.message())]))?;
    from_table(&table)
}

/// Parses a configuration after applying `ENSKOG_<SECTION>_<KEY>` overrides.
pub fn parse_config_with_env(
    text: &str,
    vars: impl IntoIterator<Item = (String, String)>,
) -> Result<RunConfig, ConfigError> {
    let mut table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::new(vec![format!("syntax: {}", e.message())]))?;
    apply_env(&mut table, vars)?;
    from_table(&table)
}

fn apply_env(
    table: &mut Table,
    vars: impl IntoIterator<Item = (String, String)>,
) -> Result<(), ConfigError> {
    let mut errors = Vec::new();
    let mut overrides: Vec<(String, String)> = vars
        .into_iter()
        .filter(|(k, _)| k.starts_with(ENV_PREFIX))
        .collect();
    overrides.sort();
    for (name, raw) in overrides {
        let rest = name[ENV_PREFIX.len()..].to_ascii_lowercase();
        let Some(section) = SECTIONS
            .iter()
            .find(|s| rest.starts_with(*s) && rest[s.len()..].starts_with('_'))
        else {
            errors.push(format!("{name}: unknown section"));
            continue;
        };
        let key = rest[section.len() + 1..].to_string();
        let value = match format!("v = {raw}").parse::<Table>() {
            Ok(mut t) => t.remove("v").unwrap_or(Value::String(raw.clone())),
            Err(_) => Value::String(raw.clone()),
        };
        let entry = table
            .entry(section.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        match entry {
            Value::Table(t) => {
                t.insert(key, value);
            }
            _ => errors.push(format!("{name}: [{section}] is not a section")),
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(ConfigError::new(errors))
    }
}

fn from_table(table: &Table) -> Result<RunConfig, ConfigError> {
    let mut r = Reader {
        table,
        errors: Vec::new(),
    };
    for (name, value) in table {
        match KNOWN_KEYS.iter().find(|(s, _)| s == name) {
            None => r.errors.push(format!("unknown section [{name}]")),
            Some((_, keys)) => {
                if let Value::Table(t) = value {
                    for key in t.keys() {
                        if !keys.contains(&key.as_str()) {
                            r.errors.push(format!("unknown key {name}.{key}"));
                        }
                    }
                }
            }
        }
    }

    let n = r.unsigned("system", "n", None) as usize;
    let t_end = r.float("system", "t_end", None);
    let seed = r.unsigned("system", "seed", None);
    let system = SystemConfig {
        d: r.unsigned("system", "d", Some(3)) as usize,
        n,
        t_end,
        seed,
        checkpoint_dt: r.float("system", "checkpoint_dt", Some(t_end / 10.0)),
        record_events: r.boolean("system", "record_events", true),
    };
    let kernel = KernelConfig {
        sigma: r.choice("kernel", "sigma", "power-law", &SIGMA_NAMES),
        gamma: r.float("kernel", "gamma", None),
        c_sigma: r.float("kernel", "c_sigma", Some(1.0)),
        nu: r.float("kernel", "nu", None),
        theta_min: r.float("kernel", "theta_min", None),
        rho: r.float("kernel", "rho", None),
        truncation: r.choice("kernel", "truncation", "auto", &TRUNCATION_NAMES),
        level: match r.raw("kernel", "level") {
            None => None,
            Some(Value::String(s)) if s == "auto" => None,
            Some(v) => match as_float(v) {
                Some(x) => Some(x),
                None => {
                    r.errors
                        .push("kernel.level must be a number or \"auto\"".into());
                    None
                }
            },
        },
    };
    let initial = InitialConfig {
        law: r.choice("initial", "law", "gaussian", &LAW_NAMES),
        position_scale: r.float("initial", "position_scale", Some(1.0)),
        temperature: r.float("initial", "temperature", Some(1.0)),
        radius: r.float("initial", "radius", Some(1.0)),
        velocity: r
            .list("initial", "velocity", as_float)
            .unwrap_or_else(|| vec![0.0; system.d]),
    };
    let diagnostics = DiagnosticsConfig {
        moments: r
            .list("diagnostics", "moments", as_float)
            .unwrap_or(vec![2.0, 4.0]),
        psi: r.choice("diagnostics", "psi", "bump", &PSI_NAMES),
        psi_radius: r.float("diagnostics", "psi_radius", Some(1.5)),
        psi_scale: r.float("diagnostics", "psi_scale", Some(50.0)),
        theta_nodes: r.unsigned("diagnostics", "theta_nodes", Some(8)) as usize,
        xi_nodes: r.unsigned("diagnostics", "xi_nodes", Some(8)) as usize,
        povzner_p: r
            .list("diagnostics", "povzner_p", |v| {
                as_unsigned(v).map(|p| p as u32)
            })
            .unwrap_or(vec![2, 3, 4]),
        povzner_samples: r.unsigned("diagnostics", "povzner_samples", Some(10_000)) as usize,
        tagged_paths: r.unsigned("diagnostics", "tagged_paths", Some(0)) as usize,
        regime: r.choice("diagnostics", "regime", "auto", &REGIME_NAMES),
        envelope_p: r.float("diagnostics", "envelope_p", Some(4.0)),
        calibration_seeds: r
            .list("diagnostics", "calibration_seeds", as_unsigned)
            .unwrap_or_default(),
    };
    let experiment = ExperimentConfig {
        kind: r.choice("experiment", "kind", "run", &ExperimentKind::NAMES),
        out: PathBuf::from(r.string("experiment", "out", "out")),
        seeds: r
            .list("experiment", "seeds", as_unsigned)
            .unwrap_or(vec![seed]),
        ns: r
            .list("experiment", "ns", |v| as_unsigned(v).map(|n| n as usize))
            .unwrap_or(vec![n]),
        jobs: r.unsigned("experiment", "jobs", Some(1)) as usize,
    };
    let cfg = RunConfig {
        experiment,
        system,
        kernel,
        initial,
        diagnostics,
    };
    validate(&cfg, &mut r);
    if r.errors.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::new(r.errors))
    }
}

fn validate(c: &RunConfig, r: &mut Reader<'_>) {
    let s = &c.system;
    let k = &c.kernel;
    r.check((3..=6).contains(&s.d), || {
        format!("system.d = {} must be in 3..=6", s.d)
    });
    r.check(s.n >= 2, || {
        format!("system.n = {} must be at least 2", s.n)
    });
    r.check(s.t_end > 0.0 && s.t_end.is_finite(), || {
        format!("system.t_end = {} must be positive", s.t_end)
    });
    r.check(s.checkpoint_dt > 0.0, || {
        format!(
            "system.checkpoint_dt = {} must be positive",
            s.checkpoint_dt
        )
    });
    r.check(k.gamma > -1.0 && k.gamma <= 2.0, || {
        format!("kernel.gamma = {} violates γ ∈ (-1, 2]", k.gamma)
    });
    r.check(k.sigma != SigmaKind::Maxwellian || k.gamma == 0.0, || {
        "kernel.sigma = \"maxwellian\" requires gamma = 0".into()
    });
    r.check(k.c_sigma >= 1.0, || {
        format!("kernel.c_sigma = {} violates c_σ ≥ 1", k.c_sigma)
    });
    r.check(k.nu > 0.0 && k.nu < 2.0, || {
        format!("kernel.nu = {} violates ν ∈ (0, 2)", k.nu)
    });
    r.check(k.theta_min > 0.0 && k.theta_min < PI, || {
        format!("kernel.theta_min = {} violates θ_min ∈ (0, π)", k.theta_min)
    });
    r.check(k.rho > 0.0 && k.rho.is_finite(), || {
        format!("kernel.rho = {} violates ρ > 0", k.rho)
    });
    match (k.truncation, k.gamma > 0.0) {
        (TruncationKind::EnergyBall, false) => r
            .errors
            .push("kernel.truncation = \"energy-ball\" requires gamma > 0".into()),
        (TruncationKind::PairwiseClip, true) => r
            .errors
            .push("kernel.truncation = \"pairwise-clip\" requires gamma <= 0".into()),
        _ => {}
    }
    if let Some(m) = k.level {
        r.check(m >= 1.0 && m.is_finite(), || {
            format!("kernel.level = {m} must be at least 1")
        });
    }
    let i = &c.initial;
    r.check(i.position_scale >= 0.0, || {
        "initial.position_scale must be nonnegative".into()
    });
    r.check(i.temperature >= 0.0, || {
        "initial.temperature must be nonnegative".into()
    });
    r.check(i.radius >= 0.0, || {
        "initial.radius must be nonnegative".into()
    });
    r.check(i.velocity.len() == s.d, || {
        format!("initial.velocity needs {} entries", s.d)
    });
    let dg = &c.diagnostics;
    r.check(dg.moments.iter().all(|&p| p >= 0.0), || {
        "diagnostics.moments must be nonnegative".into()
    });
    r.check(dg.psi_radius > 0.0, || {
        "diagnostics.psi_radius must be positive".into()
    });
    r.check(dg.psi_scale > 0.0, || {
        "diagnostics.psi_scale must be positive".into()
    });
    r.check(dg.theta_nodes >= 8 && dg.xi_nodes >= 8, || {
        "diagnostics quadrature needs at least 8 nodes per dimension".into()
    });
    r.check(dg.povzner_p.iter().all(|&p| p >= 2), || {
        "diagnostics.povzner_p entries must be at least 2".into()
    });
    r.check(dg.envelope_p > 0.0, || {
        "diagnostics.envelope_p must be positive".into()
    });
    let e = &c.experiment;
    r.check(!e.seeds.is_empty(), || {
        "experiment.seeds must not be empty".into()
    });
    r.check(!e.ns.is_empty() && e.ns.iter().all(|&n| n >= 2), || {
        "experiment.ns entries must be at least 2".into()
    });
    r.check(e.jobs >= 1, || "experiment.jobs must be at least 1".into());
}

fn float_list(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| Value::Float(x)).collect())
}

fn int_list<T: Copy + Into<u64>>(xs: &[T]) -> Value {
    Value::Array(
        xs.iter()
            .map(|&x| Value::Integer(x.into() as i64))
            .collect(),
    )
}

impl RunConfig {
    /// Canonical text form: every key, sections and keys in a fixed order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, section) in self.to_sections() {
            out.push_str(&format!("[{name}]\n"));
            for (key, value) in section {
                out.push_str(&format!("{key} = {value}\n"));
            }
            out.push('\n');
        }
        out
    }

    fn to_sections(&self) -> Vec<(&'static str, Vec<(&'static str, Value)>)> {
        let e = &self.experiment;
        let s = &self.system;
        let k = &self.kernel;
        let i = &self.initial;
        let d = &self.diagnostics;
        let string = |x: &str| Value::String(x.to_string());
        let ns: Vec<u64> = e.ns.iter().map(|&n| n as u64).collect();
        vec![
            (
                "experiment",
                vec![
                    ("kind", string(name_of(&ExperimentKind::NAMES, e.kind))),
                    ("out", string(&e.out.to_string_lossy())),
                    ("seeds", int_list(&e.seeds)),
                    ("ns", int_list(&ns)),
                    ("jobs", Value::Integer(e.jobs as i64)),
                ],
            ),
            (
                "system",
                vec![
                    ("d", Value::Integer(s.d as i64)),
                    ("n", Value::Integer(s.n as i64)),
                    ("t_end", Value::Float(s.t_end)),
                    ("seed", Value::Integer(s.seed as i64)),
                    ("checkpoint_dt", Value::Float(s.checkpoint_dt)),
                    ("record_events", Value::Boolean(s.record_events)),
                ],
            ),
            (
                "kernel",
                vec![
                    ("sigma", string(name_of(&SIGMA_NAMES, k.sigma))),
                    ("gamma", Value::Float(k.gamma)),
                    ("c_sigma", Value::Float(k.c_sigma)),
                    ("nu", Value::Float(k.nu)),
                    ("theta_min", Value::Float(k.theta_min)),
                    ("rho", Value::Float(k.rho)),
                    (
                        "truncation",
                        string(name_of(&TRUNCATION_NAMES, k.truncation)),
                    ),
                    ("level", k.level.map_or(string("auto"), Value::Float)),
                ],
            ),
            (
                "initial",
                vec![
                    ("law", string(name_of(&LAW_NAMES, i.law))),
                    ("position_scale", Value::Float(i.position_scale)),
                    ("temperature", Value::Float(i.temperature)),
                    ("radius", Value::Float(i.radius)),
                    ("velocity", float_list(&i.velocity)),
                ],
            ),
            (
                "diagnostics",
                vec![
                    ("moments", float_list(&d.moments)),
                    ("psi", string(name_of(&PSI_NAMES, d.psi))),
                    ("psi_radius", Value::Float(d.psi_radius)),
                    ("psi_scale", Value::Float(d.psi_scale)),
                    ("theta_nodes", Value::Integer(d.theta_nodes as i64)),
                    ("xi_nodes", Value::Integer(d.xi_nodes as i64)),
                    ("povzner_p", int_list(&d.povzner_p)),
                    ("povzner_samples", Value::Integer(d.povzner_samples as i64)),
                    ("tagged_paths", Value::Integer(d.tagged_paths as i64)),
                    ("regime", string(name_of(&REGIME_NAMES, d.regime))),
                    ("envelope_p", Value::Float(d.envelope_p)),
                    ("calibration_seeds", int_list(&d.calibration_seeds)),
                ],
            ),
        ]
    }

    /// Snapshot times `k·dt` below `t_end`, then `t_end`.
    pub fn checkpoints(&self) -> Vec<f64> {
        let s = &self.system;
        let mut times = Vec::new();
        let mut k = 0u64;
        loop {
            let t = k as f64 * s.checkpoint_dt;
            if t >= s.t_end * (1.0 - 1e-12) {
                break;
            }
            times.push(t);
            k += 1;
        }
        times.push(s.t_end);
        times
    }

    pub fn kernel_suite(&self) -> Result<KernelSuite, enskog_core::Error> {
        let k = &self.kernel;
        let velocity = match k.sigma {
            SigmaKind::Maxwellian => VelocityKernel::maxwellian(),
            SigmaKind::PowerLaw => VelocityKernel::power_law(k.gamma)?,
        }
        .with_c_sigma(k.c_sigma)?;
        let level = k.level.map_or(Level::Auto, Level::Fixed);
        let truncation = match k.truncation {
            TruncationKind::Auto => Truncation::for_gamma(k.gamma, level),
            TruncationKind::EnergyBall => Truncation {
                mode: TruncationMode::EnergyBall,
                level,
            },
            TruncationKind::PairwiseClip => Truncation {
                mode: TruncationMode::PairwiseClip,
                level,
            },
        };
        Ok(KernelSuite {
            velocity,
            angular: AngularMeasure::power_law(k.nu, k.theta_min)?,
            spatial: SpatialKernel::new(k.rho)?,
            truncation,
        })
    }

    pub fn initial_law<const D: usize>(&self) -> InitialLaw<D> {
        let i = &self.initial;
        match i.law {
            LawKind::Gaussian => InitialLaw::Gaussian {
                position_scale: i.position_scale,
                temperature: i.temperature,
            },
            LawKind::UniformBall => InitialLaw::UniformBall {
                position_scale: i.position_scale,
                radius: i.radius,
            },
            LawKind::PointMass => {
                let mut v = Vector::<D>::zero();
                for (j, x) in i.velocity.iter().take(D).enumerate() {
                    v[j] = *x;
                }
                InitialLaw::PointMass {
                    position: Vector::zero(),
                    velocity: v,
                }
            }
        }
    }

    /// Core simulation parameters for dimension `D` (which must equal
    /// `system.d`), with `n` and `seed` substituted.
    pub fn sim_config<const D: usize>(&self, n: usize, seed: u64) -> crate::Result<SimConfig<D>> {
        if D != self.system.d {
            return Err(ConfigError::new(vec![format!(
                "system.d = {} but dimension {D} was requested",
                self.system.d
            )])
            .into());
        }
        Ok(SimConfig {
            n,
            t_end: self.system.t_end,
            seed,
            checkpoints: self.checkpoints(),
            kernels: self.kernel_suite()?,
            initial: self.initial_law(),
            record_events: self.system.record_events,
        })
    }

    pub fn test_function(&self) -> Result<TestFunction<3>, enskog_core::Error> {
        let d = &self.diagnostics;
        match d.psi {
            PsiKind::Bump => TestFunction::bump(Vector::zero(), Vector::zero(), d.psi_radius),
            PsiKind::Momentum => TestFunction::clamp(Monomial::Velocity(0), d.psi_scale),
            PsiKind::Energy => TestFunction::clamp(Monomial::Energy, d.psi_scale),
            PsiKind::Position => TestFunction::clamp(Monomial::Position(0), d.psi_scale),
        }
    }

    /// Envelope regime, or `None` when no regime covers `γ` (the `γ = 2`
    /// endpoint), in which case only moment stability is checked.
    pub fn regime(&self) -> Option<Regime> {
        let g = self.kernel.gamma;
        match self.diagnostics.regime {
            RegimeKind::SoftExponential => Some(Regime::SoftExponential),
            RegimeKind::SoftPolynomial => Some(Regime::SoftPolynomial),
            RegimeKind::HardSubcritical => Some(Regime::HardSubcritical),
            RegimeKind::HardSup => Some(Regime::HardSup),
            RegimeKind::Auto if g >= 2.0 => None,
            RegimeKind::Auto if g > 0.0 => Some(Regime::HardSubcritical),
            RegimeKind::Auto if g == 0.0 => Some(Regime::SoftExponential),
            RegimeKind::Auto => Some(Regime::SoftPolynomial),
        }
    }

    /// Name of the test function used in output headers.
    pub fn psi_name(&self) -> &'static str {
        name_of(&PSI_NAMES, self.diagnostics.psi)
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
