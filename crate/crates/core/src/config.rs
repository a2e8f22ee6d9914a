//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, lists are comma
//! separated. Phases accept a `pi` suffix (`2pi`, `0.5pi`). Every key can be
//! overridden by an environment variable `MJSPEC_<KEY>` (upper case).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::classify::Thresholds;
use crate::model::{GeometryError, JunctionGeometry, MaterialParams, PhaseGrid, Section};
use crate::spectrum::{GapConvention, SolverKind, SolverOptions, SweepGrid, DEFAULT_LEVELS, DEFAULT_TOLERANCE};

pub const ENV_PREFIX: &str = "MJSPEC_";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldUnit {
    /// Multiples of the critical field.
    Bc,
    Mev,
}

impl fmt::Display for FieldUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldUnit::Bc => "bc",
            FieldUnit::Mev => "mev",
        })
    }
}

impl FromStr for FieldUnit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bc" => Ok(FieldUnit::Bc),
            "mev" => Ok(FieldUnit::Mev),
            _ => Err(format!("unknown field unit '{s}' (expected bc or mev)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub effective_mass_ratio: f64,
    pub rashba_alpha: f64,
    pub mu: f64,
    pub delta0: f64,
    pub length_sc: f64,
    pub length_normal: f64,
    pub lattice_spacing: f64,
    pub eta: Vec<f64>,
    pub b: Vec<f64>,
    pub b_unit: FieldUnit,
    pub phi_start: f64,
    pub phi_stop: f64,
    pub phi_count: usize,
    pub k: usize,
    pub solver: SolverKind,
    pub gap_convention: GapConvention,
    pub tolerance: f64,
    pub s_topo: f64,
    pub s_triv: f64,
    pub transmissions: Vec<f64>,
    /// Defaults to `delta0` when unset.
    pub delta_eff: Option<f64>,
    /// Default to `delta_eff / 20` when unset.
    pub g12: Option<f64>,
    pub g34: Option<f64>,
    pub output_dir: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Env(String),
    Missing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub origin: Origin,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.origin {
            Origin::Line(n) => write!(f, "line {n}: {}", self.message),
            Origin::Env(var) => write!(f, "{var}: {}", self.message),
            Origin::Missing => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// Every accepted key, in canonical order, and whether it must be given.
pub const KEYS: &[(&str, bool)] = &[
    ("effective_mass_ratio", true),
    ("rashba_alpha", true),
    ("mu", true),
    ("delta0", true),
    ("length_sc", true),
    ("length_normal", true),
    ("lattice_spacing", true),
    ("eta", true),
    ("b", true),
    ("b_unit", false),
    ("phi_start", false),
    ("phi_stop", false),
    ("phi_count", false),
    ("k", false),
    ("solver", false),
    ("gap_convention", false),
    ("tolerance", false),
    ("s_topo", false),
    ("s_triv", false),
    ("transmissions", false),
    ("delta_eff", false),
    ("g12", false),
    ("g34", false),
    ("output_dir", false),
];

impl RunConfig {
    /// InSb junction: m* = 0.015, α = 20 meV·nm, μ = 0.5 meV, Δ0 = 0.25 meV,
    /// L = 2 μm, l = a = 10 nm, η from 0.6 to 1.0, zero field.
    pub fn reference() -> Self {
        let p = MaterialParams::insb_reference();
        let g = JunctionGeometry::reference();
        Self {
            effective_mass_ratio: p.effective_mass_ratio,
            rashba_alpha: p.rashba_alpha,
            mu: p.mu,
            delta0: p.delta0,
            length_sc: g.length_sc,
            length_normal: g.length_normal,
            lattice_spacing: g.lattice_spacing,
            eta: vec![0.6, 0.7, 0.8, 0.9, 1.0],
            b: vec![0.0],
            b_unit: FieldUnit::Bc,
            phi_start: 0.0,
            phi_stop: 2.0 * PI,
            phi_count: 101,
            k: DEFAULT_LEVELS,
            solver: SolverKind::default(),
            gap_convention: GapConvention::default(),
            tolerance: DEFAULT_TOLERANCE,
            s_topo: Thresholds::default().s_topo,
            s_triv: Thresholds::default().s_triv,
            transmissions: vec![0.2, 0.4, 0.6, 0.8, 1.0],
            delta_eff: None,
            g12: None,
            g34: None,
            output_dir: ".".into(),
        }
    }

    pub fn material(&self) -> MaterialParams {
        MaterialParams {
            effective_mass_ratio: self.effective_mass_ratio,
            rashba_alpha: self.rashba_alpha,
            mu: self.mu,
            delta0: self.delta0,
            zeeman_b: 0.0,
        }
    }

    /// Geometry with the first η of the list.
    pub fn geometry(&self) -> JunctionGeometry {
        JunctionGeometry {
            length_sc: self.length_sc,
            length_normal: self.length_normal,
            lattice_spacing: self.lattice_spacing,
            eta: self.eta.first().copied().unwrap_or(1.0),
        }
    }

    pub fn critical_field(&self) -> f64 {
        self.material().critical_field()
    }

    /// Zeeman energies in meV.
    pub fn zeeman_mev(&self) -> Vec<f64> {
        match self.b_unit {
            FieldUnit::Mev => self.b.clone(),
            FieldUnit::Bc => {
                let bc = self.critical_field();
                self.b.iter().map(|b| b * bc).collect()
            }
        }
    }

    pub fn phase_grid(&self) -> PhaseGrid {
        PhaseGrid::uniform(self.phi_start, self.phi_stop, self.phi_count).expect("validated phase grid")
    }

    pub fn sweep_grid(&self) -> SweepGrid {
        SweepGrid {
            phases: self.phase_grid(),
            etas: self.eta.clone(),
            zeeman: self.zeeman_mev(),
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            kind: self.solver,
            tolerance: self.tolerance,
            levels: self.k,
            convention: self.gap_convention,
        }
    }

    pub fn thresholds(&self) -> Thresholds {
        Thresholds {
            s_topo: self.s_topo,
            s_triv: self.s_triv,
        }
    }

    pub fn delta_eff(&self) -> f64 {
        self.delta_eff.unwrap_or(self.delta0)
    }

    pub fn g12(&self) -> f64 {
        self.g12.unwrap_or(self.delta_eff() / 20.0)
    }

    pub fn g34(&self) -> f64 {
        self.g34.unwrap_or(self.delta_eff() / 20.0)
    }

    /// Canonical text form; `parse_config` of the result reproduces `self`.
    pub fn to_text(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// `(key, value)` pairs in canonical order, unset optionals omitted.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ");
        let mut out = vec![
            ("effective_mass_ratio", self.effective_mass_ratio.to_string()),
            ("rashba_alpha", self.rashba_alpha.to_string()),
            ("mu", self.mu.to_string()),
            ("delta0", self.delta0.to_string()),
            ("length_sc", self.length_sc.to_string()),
            ("length_normal", self.length_normal.to_string()),
            ("lattice_spacing", self.lattice_spacing.to_string()),
            ("eta", list(&self.eta)),
            ("b", list(&self.b)),
            ("b_unit", self.b_unit.to_string()),
            ("phi_start", self.phi_start.to_string()),
            ("phi_stop", self.phi_stop.to_string()),
            ("phi_count", self.phi_count.to_string()),
            ("k", self.k.to_string()),
            ("solver", self.solver.to_string()),
            ("gap_convention", self.gap_convention.to_string()),
            ("tolerance", self.tolerance.to_string()),
            ("s_topo", self.s_topo.to_string()),
            ("s_triv", self.s_triv.to_string()),
            ("transmissions", list(&self.transmissions)),
        ];
        for (key, value) in [("delta_eff", self.delta_eff), ("g12", self.g12), ("g34", self.g34)] {
            if let Some(v) = value {
                out.push((key, v.to_string()));
            }
        }
        out.push(("output_dir", self.output_dir.clone()));
        out
    }
}

fn parse_number(s: &str) -> Result<f64, String> {
    let v = match s.strip_suffix("pi") {
        Some("") => Ok(PI),
        Some(m) => m.trim().parse::<f64>().map(|m| m * PI),
        None => s.parse::<f64>(),
    }
    .map_err(|_| format!("expected a number, got '{s}'"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a finite number, got '{s}'"))
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    let items: Result<Vec<f64>, String> = s.split(',').map(|x| parse_number(x.trim())).collect();
    let items = items?;
    if items.is_empty() {
        return Err("expected at least one value".into());
    }
    Ok(items)
}

fn parse_count(s: &str) -> Result<usize, String> {
    s.parse::<usize>()
        .map_err(|_| format!("expected a non-negative integer, got '{s}'"))
}

/// Partially filled configuration while reading.
#[derive(Default)]
struct Draft {
    values: Vec<(&'static str, String, Origin)>,
}

impl Draft {
    fn set(&mut self, key: &'static str, value: String, origin: Origin) {
        self.values.retain(|(k, _, _)| *k != key);
        self.values.push((key, value, origin));
    }
}

fn canonical_key(key: &str) -> Option<&'static str> {
    KEYS.iter().map(|(k, _)| *k).find(|k| *k == key)
}

/// Parses `text` without environment overrides.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    parse_config_with_env(text, |_| None)
}

/// Parses `text`, then applies `MJSPEC_<KEY>` values returned by `env`.
pub fn parse_config_with_env(text: &str, env: impl Fn(&str) -> Option<String>) -> Result<RunConfig, ConfigErrors> {
    let mut errors = Vec::new();
    let mut draft = Draft::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            errors.push(ConfigError {
                origin: Origin::Line(line),
                message: format!("expected 'key = value', got '{content}'"),
            });
            continue;
        };
        let key = key.trim();
        match canonical_key(key) {
            Some(k) => {
                if draft.values.iter().any(|(d, _, _)| *d == k) {
                    errors.push(ConfigError {
                        origin: Origin::Line(line),
                        message: format!("duplicate key '{k}'"),
                    });
                }
                draft.set(k, value.trim().to_string(), Origin::Line(line));
            }
            None => errors.push(ConfigError {
                origin: Origin::Line(line),
                message: format!("unknown key '{key}'"),
            }),
        }
    }
    for (key, _) in KEYS {
        let var = format!("{ENV_PREFIX}{}", key.to_uppercase());
        if let Some(value) = env(&var) {
            draft.set(key, value.trim().to_string(), Origin::Env(var));
        }
    }
    let config = build(&draft, &mut errors);
    if errors.is_empty() {
        Ok(config)
    } else {
        Err(ConfigErrors(errors))
    }
}

fn build(draft: &Draft, errors: &mut Vec<ConfigError>) -> RunConfig {
    let mut cfg = RunConfig::reference();
    for (key, required) in KEYS {
        if *required && !draft.values.iter().any(|(k, _, _)| k == key) {
            errors.push(ConfigError {
                origin: Origin::Missing,
                message: format!("missing required key '{key}'"),
            });
        }
    }
    for (key, value, origin) in &draft.values {
        let mut fail = |message: String| {
            errors.push(ConfigError {
                origin: origin.clone(),
                message,
            })
        };
        let v = value.as_str();
        let result: Result<(), String> = (|| {
            match *key {
                "effective_mass_ratio" => {
                    cfg.effective_mass_ratio = parse_number(v)?;
                    if cfg.effective_mass_ratio <= 0.0 {
                        return Err("effective_mass_ratio must be positive".into());
                    }
                }
                "rashba_alpha" => cfg.rashba_alpha = parse_number(v)?,
                "mu" => cfg.mu = parse_number(v)?,
                "delta0" => {
                    cfg.delta0 = parse_number(v)?;
                    if cfg.delta0 < 0.0 {
                        return Err("delta0 must be non-negative".into());
                    }
                }
                "length_sc" => cfg.length_sc = parse_number(v)?,
                "length_normal" => cfg.length_normal = parse_number(v)?,
                "lattice_spacing" => cfg.lattice_spacing = parse_number(v)?,
                "eta" => {
                    cfg.eta = parse_list(v)?;
                    if cfg.eta.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
                        return Err("eta must lie in (0, 1]".into());
                    }
                }
                "b" => {
                    cfg.b = parse_list(v)?;
                    if cfg.b.iter().any(|b| *b < 0.0) {
                        return Err("b must be non-negative".into());
                    }
                }
                "b_unit" => cfg.b_unit = v.parse()?,
                "phi_start" => cfg.phi_start = parse_number(v)?,
                "phi_stop" => cfg.phi_stop = parse_number(v)?,
                "phi_count" => {
                    cfg.phi_count = parse_count(v)?;
                    if cfg.phi_count < 2 {
                        return Err("phi_count must be at least 2".into());
                    }
                }
                "k" => {
                    cfg.k = parse_count(v)?;
                    if cfg.k < 2 {
                        return Err("k must be at least 2".into());
                    }
                }
                "solver" => cfg.solver = v.parse()?,
                "gap_convention" => cfg.gap_convention = v.parse()?,
                "tolerance" => {
                    cfg.tolerance = parse_number(v)?;
                    if cfg.tolerance <= 0.0 {
                        return Err("tolerance must be positive".into());
                    }
                }
                "s_topo" => cfg.s_topo = parse_number(v)?,
                "s_triv" => cfg.s_triv = parse_number(v)?,
                "transmissions" => {
                    cfg.transmissions = parse_list(v)?;
                    if cfg.transmissions.iter().any(|t| !(0.0..=1.0).contains(t)) {
                        return Err("transmissions must lie in [0, 1]".into());
                    }
                }
                "delta_eff" => {
                    let d = parse_number(v)?;
                    if d < 0.0 {
                        return Err("delta_eff must be non-negative".into());
                    }
                    cfg.delta_eff = Some(d);
                }
                "g12" => cfg.g12 = Some(parse_number(v)?),
                "g34" => cfg.g34 = Some(parse_number(v)?),
                "output_dir" => {
                    if v.is_empty() {
                        return Err("output_dir must not be empty".into());
                    }
                    cfg.output_dir = v.to_string();
                }
                _ => unreachable!("key list and parser out of sync"),
            }
            Ok(())
        })();
        if let Err(m) = result {
            fail(m);
        }
    }
    cross_check(&cfg, draft, errors);
    cfg
}

fn origin_of(draft: &Draft, key: &str) -> Origin {
    draft
        .values
        .iter()
        .find(|(k, _, _)| *k == key)
        .map(|(_, _, o)| o.clone())
        .unwrap_or(Origin::Missing)
}

/// Constraints spanning several keys.
fn cross_check(cfg: &RunConfig, draft: &Draft, errors: &mut Vec<ConfigError>) {
    if !errors.is_empty() {
        return;
    }
    if let Err(e) = cfg.geometry().total_sites() {
        let key = match &e {
            GeometryError::NonPositiveSpacing(_) => "lattice_spacing",
            GeometryError::NonPositiveLength { section, .. } | GeometryError::NotCommensurate { section, .. } => {
                match section {
                    Section::Normal => "length_normal",
                    Section::Superconducting => "length_sc",
                }
            }
        };
        errors.push(ConfigError {
            origin: origin_of(draft, key),
            message: e.to_string(),
        });
    }
    if !(cfg.phi_start < cfg.phi_stop) {
        errors.push(ConfigError {
            origin: origin_of(draft, "phi_stop"),
            message: "phi_stop must exceed phi_start".into(),
        });
    }
    if !(0.0 <= cfg.s_topo && cfg.s_topo < cfg.s_triv) {
        errors.push(ConfigError {
            origin: origin_of(draft, "s_triv"),
            message: "thresholds must satisfy 0 <= s_topo < s_triv".into(),
        });
    }
}
