//! Run configuration: a line-oriented `key = value` format with `#`
//! comments and an optional `[problem]` section for explicit problems.
//!
//! ```text
//! preset = chemo_two_bumps
//! nx = 1000
//! horizon = 5
//! velocity_mode = naive
//! allow_naive = true
//! ```
//!
//! or, instead of a preset,
//!
//! ```text
//! [problem]
//! domain = -2.5, 2.5
//! potential = exp_half
//! law = arctan
//! k = 10
//! bumps = 1:0.7:10, 1:-0.7:10
//! diracs = 0.5:0.0
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::VelocityGrid;
use crate::kinetic::{EquilibriumModel, Splitting};
use crate::law::VelocityLaw;
use crate::macro_scheme::VelocityMode;
use crate::models::{preset, Bump, Dirac, InitialData, KineticSpec, ProblemPreset};
use crate::potential::{Closure, PointyPotential};

/// Which scheme a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchemeKind {
    #[default]
    Macro,
    KineticLie,
    KineticStrang,
}

impl SchemeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Macro => "macro",
            Self::KineticLie => "kinetic_lie",
            Self::KineticStrang => "kinetic_strang",
        }
    }

    pub fn is_kinetic(&self) -> bool {
        !matches!(self, Self::Macro)
    }

    pub fn splitting(&self) -> Splitting {
        match self {
            Self::KineticStrang => Splitting::Strang,
            _ => Splitting::Lie,
        }
    }
}

/// Explicit problem block.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub domain: (f64, f64),
    pub potential: String,
    pub law: String,
    pub k: f64,
    pub initial: InitialData,
}

/// Where the problem comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Preset(String),
    Explicit(ProblemSpec),
}

/// Validated run configuration with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemSource,
    pub scheme: SchemeKind,
    pub velocity_mode: VelocityMode,
    pub allow_naive: bool,
    pub nx: usize,
    /// `None`: the preset's horizon (2.0 for explicit problems).
    pub horizon: Option<f64>,
    pub snapshot_every: f64,
    pub output_dir: PathBuf,
    pub eps: Option<f64>,
    pub equilibrium: Option<String>,
    pub equilibrium_k: f64,
    pub nv: usize,
    pub vmax: f64,
    pub dump_f: bool,
    pub closure: Closure,
    pub dt_max: f64,
    pub deterministic: bool,
    pub blowup_fraction: f64,
    /// Grids of the refinement study.
    pub grids: Vec<usize>,
    /// Relaxation times of the AP sweep.
    pub eps_list: Vec<f64>,
    /// Steps of the AP sweep.
    pub steps: usize,
}

pub const DEFAULT_NX: usize = 800;
pub const DEFAULT_HORIZON: f64 = 2.0;
pub const DEFAULT_SNAPSHOT_EVERY: f64 = 0.02;

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemSource::Preset("vpfp_one_bump".into()),
            scheme: SchemeKind::Macro,
            velocity_mode: VelocityMode::VolpertLiteral,
            allow_naive: false,
            nx: DEFAULT_NX,
            horizon: None,
            snapshot_every: DEFAULT_SNAPSHOT_EVERY,
            output_dir: PathBuf::from("output"),
            eps: None,
            equilibrium: None,
            equilibrium_k: 10.0,
            nv: 32,
            vmax: 1.0,
            dump_f: false,
            closure: Closure::FarField,
            dt_max: 0.1,
            deterministic: false,
            blowup_fraction: crate::diagnostics::BLOWUP_FRACTION,
            grids: vec![200, 400, 800],
            eps_list: vec![0.1, 1e-2, 1e-3, 1e-10],
            steps: 100,
        }
    }
}

const TOP_KEYS: [&str; 22] = [
    "preset",
    "scheme",
    "velocity_mode",
    "allow_naive",
    "nx",
    "horizon",
    "snapshot_every",
    "output_dir",
    "eps",
    "equilibrium",
    "equilibrium_k",
    "nv",
    "vmax",
    "dump_f",
    "closure",
    "dt_max",
    "deterministic",
    "blowup_fraction",
    "grids",
    "eps_list",
    "steps",
    "velocity_equal_mode",
];
const PROBLEM_KEYS: [&str; 6] = ["domain", "potential", "law", "k", "bumps", "diracs"];

struct Entry {
    line: usize,
    value: String,
}

fn field_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

fn num<T: FromStr>(field: &str, e: &Entry) -> Result<T> {
    e.value.parse().map_err(|_| Error::Parse { line: e.line, msg: format!("{field}: cannot parse '{}'", e.value) })
}

fn boolean(field: &str, e: &Entry) -> Result<bool> {
    match e.value.as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::Parse { line: e.line, msg: format!("{field}: expected true or false, got '{other}'") }),
    }
}

fn list<T: FromStr>(field: &str, e: &Entry) -> Result<Vec<T>> {
    e.value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Parse { line: e.line, msg: format!("{field}: cannot parse '{s}'") }))
        .collect()
}

fn tuples(field: &str, e: &Entry, arity: usize) -> Result<Vec<Vec<f64>>> {
    e.value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let parts: std::result::Result<Vec<f64>, _> = item.split(':').map(|p| p.trim().parse::<f64>()).collect();
            match parts {
                Ok(p) if p.len() == arity => Ok(p),
                _ => Err(Error::Parse {
                    line: e.line,
                    msg: format!("{field}: expected {arity} ':'-separated numbers, got '{item}'"),
                }),
            }
        })
        .collect()
}

fn unquote(v: &str) -> &str {
    let v = v.trim();
    if v.len() >= 2 && ((v.starts_with('"') && v.ends_with('"')) || (v.starts_with('\'') && v.ends_with('\''))) {
        &v[1..v.len() - 1]
    } else {
        v
    }
}

/// Parses and validates a configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut top: BTreeMap<String, Entry> = BTreeMap::new();
    let mut problem: BTreeMap<String, Entry> = BTreeMap::new();
    let mut section: Option<String> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            if !content.ends_with(']') {
                return Err(Error::Parse { line, msg: format!("malformed section header '{content}'") });
            }
            let name = content[1..content.len() - 1].trim();
            if name != "problem" {
                return Err(Error::Parse { line, msg: format!("unknown section [{name}]") });
            }
            section = Some(name.into());
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::Parse { line, msg: format!("expected 'key = value', got '{content}'") })?;
        let key = key.trim().to_string();
        let value = unquote(value).to_string();
        let (map, known): (&mut BTreeMap<String, Entry>, bool) = match section {
            None => (&mut top, TOP_KEYS.contains(&key.as_str())),
            Some(_) => (&mut problem, PROBLEM_KEYS.contains(&key.as_str())),
        };
        if !known {
            let scope = if section.is_some() { " in [problem]" } else { "" };
            return Err(Error::Parse { line, msg: format!("unknown key '{key}'{scope}") });
        }
        if map.contains_key(&key) {
            return Err(Error::Parse { line, msg: format!("duplicate key '{key}'") });
        }
        map.insert(key, Entry { line, value });
    }
    build(top, problem, section.is_some())
}

fn build(top: BTreeMap<String, Entry>, problem: BTreeMap<String, Entry>, has_problem: bool) -> Result<RunConfig> {
    let problem = match (top.get("preset"), has_problem) {
        (Some(_), true) => return Err(field_err("preset", "give either a preset or a [problem] block, not both")),
        (None, false) => return Err(field_err("preset", "a preset or a [problem] block is required")),
        (Some(p), false) => {
            preset(&p.value)?;
            ProblemSource::Preset(p.value.clone())
        }
        (None, true) => ProblemSource::Explicit(problem_spec(&problem)?),
    };
    let mut cfg = RunConfig { problem, ..RunConfig::default() };
    for (key, e) in &top {
        match key.as_str() {
            "preset" => {}
            "scheme" => {
                cfg.scheme = match e.value.as_str() {
                    "macro" => SchemeKind::Macro,
                    "kinetic_lie" => SchemeKind::KineticLie,
                    "kinetic_strang" => SchemeKind::KineticStrang,
                    other => {
                        return Err(field_err(
                            "scheme",
                            format!("unknown scheme '{other}' (macro, kinetic_lie, kinetic_strang)"),
                        ))
                    }
                }
            }
            "velocity_mode" => {
                cfg.velocity_mode = match e.value.as_str() {
                    "volpert_literal" => VelocityMode::VolpertLiteral,
                    "volpert_smooth" => VelocityMode::VolpertSmooth,
                    "naive" => VelocityMode::Naive,
                    other => {
                        return Err(field_err(
                            "velocity_mode",
                            format!("unknown mode '{other}' (volpert_literal, volpert_smooth, naive)"),
                        ))
                    }
                }
            }
            // Applied after the loop: it refines velocity_mode.
            "velocity_equal_mode" => {}
            "allow_naive" => cfg.allow_naive = boolean(key, e)?,
            "nx" => cfg.nx = num(key, e)?,
            "horizon" => cfg.horizon = Some(num(key, e)?),
            "snapshot_every" => cfg.snapshot_every = num(key, e)?,
            "output_dir" => cfg.output_dir = PathBuf::from(&e.value),
            "eps" => cfg.eps = Some(num(key, e)?),
            "equilibrium" => cfg.equilibrium = Some(e.value.clone()),
            "equilibrium_k" => cfg.equilibrium_k = num(key, e)?,
            "nv" => cfg.nv = num(key, e)?,
            "vmax" => cfg.vmax = num(key, e)?,
            "dump_f" => cfg.dump_f = boolean(key, e)?,
            "closure" => {
                cfg.closure = match e.value.as_str() {
                    "far_field" => Closure::FarField,
                    "anchored" => Closure::Anchored,
                    other => {
                        return Err(field_err("closure", format!("unknown closure '{other}' (far_field, anchored)")))
                    }
                }
            }
            "dt_max" => cfg.dt_max = num(key, e)?,
            "deterministic" => cfg.deterministic = boolean(key, e)?,
            "blowup_fraction" => cfg.blowup_fraction = num(key, e)?,
            "grids" => cfg.grids = list(key, e)?,
            "eps_list" => cfg.eps_list = list(key, e)?,
            "steps" => cfg.steps = num(key, e)?,
            _ => unreachable!("keys are checked while parsing"),
        }
    }
    // Equality branch of the chain-rule velocity, as its own switch.
    if let Some(e) = top.get("velocity_equal_mode") {
        if cfg.velocity_mode == VelocityMode::Naive {
            return Err(field_err("velocity_equal_mode", "has no effect with velocity_mode = naive"));
        }
        cfg.velocity_mode = match e.value.as_str() {
            "volpert_literal" => VelocityMode::VolpertLiteral,
            "volpert_smooth" => VelocityMode::VolpertSmooth,
            other => {
                return Err(field_err(
                    "velocity_equal_mode",
                    format!("unknown mode '{other}' (volpert_literal, volpert_smooth)"),
                ))
            }
        };
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn problem_spec(p: &BTreeMap<String, Entry>) -> Result<ProblemSpec> {
    let domain = match p.get("domain") {
        Some(e) => {
            let d: Vec<f64> = list("domain", e)?;
            if d.len() != 2 || !(d[1] > d[0]) {
                return Err(field_err("domain", "expected 'left, right' with left < right"));
            }
            (d[0], d[1])
        }
        None => (-2.5, 2.5),
    };
    let potential = p.get("potential").map_or("zero".to_string(), |e| e.value.clone());
    if !["zero", "exp_half", "exp_half_convolved"].contains(&potential.as_str()) {
        return Err(field_err(
            "potential",
            format!("unknown potential '{potential}' (zero, exp_half, exp_half_convolved)"),
        ));
    }
    let law = p.get("law").map_or("identity".to_string(), |e| e.value.clone());
    if !["identity", "arctan", "repulsive_arctan", "zero"].contains(&law.as_str()) {
        return Err(field_err("law", format!("unknown law '{law}' (identity, arctan, repulsive_arctan, zero)")));
    }
    let k = match p.get("k") {
        Some(e) => num("k", e)?,
        None => 10.0,
    };
    let mut initial = InitialData::default();
    if let Some(e) = p.get("bumps") {
        initial.bumps = tuples("bumps", e, 3)?.iter().map(|t| Bump { amp: t[0], center: t[1], k: t[2] }).collect();
    }
    if let Some(e) = p.get("diracs") {
        initial.diracs = tuples("diracs", e, 2)?.iter().map(|t| Dirac { mass: t[0], pos: t[1] }).collect();
    }
    if initial.bumps.iter().any(|b| b.amp < 0.0 || b.k <= 0.0) || initial.diracs.iter().any(|d| d.mass < 0.0) {
        return Err(field_err("bumps", "initial data must be nonnegative with k > 0"));
    }
    if initial.diracs.iter().any(|d| d.pos <= domain.0 || d.pos >= domain.1) {
        return Err(field_err("diracs", "point masses must lie inside the domain"));
    }
    Ok(ProblemSpec { domain, potential, law, k, initial })
}

fn validate(cfg: &RunConfig) -> Result<()> {
    if cfg.nx < 3 {
        return Err(field_err("nx", "must be >= 3"));
    }
    if let Some(h) = cfg.horizon {
        if !(h > 0.0) {
            return Err(field_err("horizon", "must be > 0"));
        }
    }
    if !(cfg.snapshot_every >= 0.0) {
        return Err(field_err("snapshot_every", "must be >= 0"));
    }
    if !(cfg.dt_max > 0.0) {
        return Err(field_err("dt_max", "must be > 0"));
    }
    if !(cfg.blowup_fraction > 0.0 && cfg.blowup_fraction <= 1.0) {
        return Err(field_err("blowup_fraction", "must lie in (0, 1]"));
    }
    if cfg.velocity_mode == VelocityMode::Naive && !cfg.allow_naive {
        return Err(field_err(
            "velocity_mode",
            "naive reproduces the wrong dynamics; set allow_naive = true to run it anyway",
        ));
    }
    if cfg.scheme.is_kinetic() {
        let preset_eps = match &cfg.problem {
            ProblemSource::Preset(name) => preset(name)?.kinetic.is_some(),
            ProblemSource::Explicit(_) => false,
        };
        match cfg.eps {
            Some(e) if !(e > 0.0) => return Err(field_err("eps", "must be > 0")),
            None if !preset_eps => return Err(field_err("eps", "eps required for kinetic schemes")),
            _ => {}
        }
        if !(cfg.vmax > 0.0) || cfg.nv < 1 {
            return Err(field_err("nv", "need nv >= 1 and vmax > 0"));
        }
        if cfg.equilibrium.is_none() && !preset_eps {
            return Err(field_err("equilibrium", "kinetic schemes need equilibrium = two_speed or smooth"));
        }
        if cfg.velocity_mode == VelocityMode::Naive && cfg.scheme.is_kinetic() && !cfg.allow_naive {
            return Err(field_err("velocity_mode", "set allow_naive = true"));
        }
    }
    if let Some(eq) = &cfg.equilibrium {
        if !["two_speed", "smooth"].contains(&eq.as_str()) {
            return Err(field_err("equilibrium", format!("unknown equilibrium '{eq}' (two_speed, smooth)")));
        }
    }
    if cfg.eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(field_err("eps_list", "entries must be > 0"));
    }
    Ok(())
}

impl RunConfig {
    /// The problem with every component wired.
    pub fn resolve_problem(&self) -> Result<ProblemPreset> {
        let mut p = match &self.problem {
            ProblemSource::Preset(name) => preset(name)?,
            ProblemSource::Explicit(spec) => {
                let potential = match spec.potential.as_str() {
                    "exp_half" => PointyPotential::exp_half(),
                    "exp_half_convolved" => PointyPotential::exp_half_convolved(),
                    _ => PointyPotential::zero(),
                };
                let law = match spec.law.as_str() {
                    "arctan" => VelocityLaw::arctan(spec.k),
                    "repulsive_arctan" => VelocityLaw::repulsive_arctan(spec.k),
                    "zero" => VelocityLaw::zero(),
                    _ => VelocityLaw::identity(),
                };
                ProblemPreset {
                    name: "custom".into(),
                    potential,
                    law,
                    kinetic: None,
                    domain: spec.domain,
                    initial: spec.initial.clone(),
                    horizon: DEFAULT_HORIZON,
                }
            }
        };
        if let Some(h) = self.horizon {
            p.horizon = h;
        }
        if self.scheme.is_kinetic() {
            let base_eps = p.kinetic.as_ref().map(|k| k.eps);
            let eps = self.eps.or(base_eps).ok_or_else(|| field_err("eps", "eps required for kinetic schemes"))?;
            let spec = match self.equilibrium.as_deref() {
                Some("two_speed") => KineticSpec {
                    vgrid: VelocityGrid::two_speed(self.vmax)?,
                    model: EquilibriumModel::TwoSpeedChemo { k: self.equilibrium_k },
                    eps,
                },
                Some(_) => KineticSpec {
                    vgrid: VelocityGrid::continuous(self.vmax, self.nv)?,
                    model: EquilibriumModel::Smooth { vmax: self.vmax, k: self.equilibrium_k, beta: 1.0 },
                    eps,
                },
                None => {
                    let mut k = p.kinetic.clone().ok_or_else(|| field_err("equilibrium", "no kinetic model"))?;
                    k.eps = eps;
                    k
                }
            };
            p.kinetic = Some(spec);
        }
        Ok(p)
    }

    /// `key = value` listing of the resolved configuration.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        match &self.problem {
            ProblemSource::Preset(name) => {
                let _ = writeln!(s, "preset = {name}");
            }
            ProblemSource::Explicit(p) => {
                let _ = writeln!(s, "problem.domain = {}, {}", p.domain.0, p.domain.1);
                let _ = writeln!(s, "problem.potential = {}", p.potential);
                let _ = writeln!(s, "problem.law = {}", p.law);
                let _ = writeln!(s, "problem.k = {}", p.k);
                let bumps: Vec<String> =
                    p.initial.bumps.iter().map(|b| format!("{}:{}:{}", b.amp, b.center, b.k)).collect();
                let diracs: Vec<String> = p.initial.diracs.iter().map(|d| format!("{}:{}", d.mass, d.pos)).collect();
                let _ = writeln!(s, "problem.bumps = {}", bumps.join(", "));
                let _ = writeln!(s, "problem.diracs = {}", diracs.join(", "));
            }
        }
        let _ = writeln!(s, "scheme = {}", self.scheme.as_str());
        let _ = writeln!(s, "velocity_mode = {}", self.velocity_mode.as_str());
        let _ = writeln!(s, "nx = {}", self.nx);
        let _ = writeln!(s, "snapshot_every = {}", self.snapshot_every);
        let _ = writeln!(
            s,
            "closure = {}",
            match self.closure {
                Closure::FarField => "far_field",
                Closure::Anchored => "anchored",
            }
        );
        let _ = writeln!(s, "dt_max = {}", self.dt_max);
        let _ = writeln!(s, "blowup_fraction = {}", self.blowup_fraction);
        if self.scheme.is_kinetic() {
            if let Some(e) = self.eps {
                let _ = writeln!(s, "eps = {e}");
            }
            if let Some(eq) = &self.equilibrium {
                let _ = writeln!(s, "equilibrium = {eq}");
                let _ = writeln!(s, "equilibrium_k = {}", self.equilibrium_k);
                let _ = writeln!(s, "nv = {}", self.nv);
                let _ = writeln!(s, "vmax = {}", self.vmax);
            }
            let _ = writeln!(s, "dump_f = {}", self.dump_f);
        }
        s
    }
}
