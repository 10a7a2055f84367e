//! Scenario configuration files.
//!
//! An INI-style document of `key = value` lines grouped in sections:
//!
//! ```text
//! [robot]
//! l1 = 320mm
//! m2 = 722g
//!
//! [controller.smc]
//! lambda = 50          # both joints
//! gamma = 10, 12       # joint 1, joint 2
//! ```
//!
//! `#` and `;` start comments. Joint-space quantities take one value (used
//! for both joints) or two comma-separated values. Lengths accept `m`, `cm`,
//! `mm`; masses `kg`, `g`, `gr`; times `s`, `ms`, `us`; angles `rad`, `deg`;
//! frequencies `rad/s`, `hz`. Bare numbers are SI. Missing keys keep their
//! defaults, and every default used is logged at `info` level.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::control::Diag2;
use crate::sim::{DisturbanceModel, FilterParams, FilterSettings, Scenario};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}, column {col}: {msg}\n  help: {remedy}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
        remedy: String,
    },

    #[error("line {line}: unknown key '{key}' in [{section}]\n  help: {remedy}")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
        remedy: String,
    },

    #[error("line {line}: bad value for '{key}': {msg}\n  help: {remedy}")]
    Unit {
        line: usize,
        key: String,
        msg: String,
        remedy: String,
    },

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("configuration does not describe a valid run: {0}\n  help: check the keys named in the message")]
    Invalid(#[from] crate::Error),
}

/// Where a default value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// Parameter of the published experiment.
    Published,
    /// Chosen for this implementation.
    Artifact,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Origin::Published => "published experiment",
            Origin::Artifact => "artifact default",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    None,
    Length,
    Mass,
    Time,
    Angle,
    Frequency,
}

impl Unit {
    fn factor(self, label: &str) -> Option<f64> {
        let label = label.to_ascii_lowercase();
        match (self, label.as_str()) {
            (_, "") => Some(1.0),
            (Unit::Length, "m") => Some(1.0),
            (Unit::Length, "cm") => Some(1e-2),
            (Unit::Length, "mm") => Some(1e-3),
            (Unit::Mass, "kg") => Some(1.0),
            (Unit::Mass, "g" | "gr") => Some(1e-3),
            (Unit::Time, "s") => Some(1.0),
            (Unit::Time, "ms") => Some(1e-3),
            (Unit::Time, "us" | "µs") => Some(1e-6),
            (Unit::Angle, "rad") => Some(1.0),
            (Unit::Angle, "deg") => Some(PI / 180.0),
            (Unit::Frequency, "rad/s") => Some(1.0),
            (Unit::Frequency, "hz") => Some(2.0 * PI),
            _ => None,
        }
    }

    fn accepted(self) -> &'static str {
        match self {
            Unit::None => "a bare number",
            Unit::Length => "m, cm or mm",
            Unit::Mass => "kg, g or gr",
            Unit::Time => "s, ms or us",
            Unit::Angle => "rad or deg",
            Unit::Frequency => "rad/s or hz",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sign {
    Any,
    Positive,
    NonNegative,
}

#[derive(Debug, Clone, Copy)]
enum Shape {
    Scalar(Unit, Sign),
    Pair(Unit, Sign),
    Word(&'static [&'static str]),
    Integer,
}

#[derive(Debug, Clone)]
enum Value {
    Nums([f64; 2]),
    Word(String),
    Int(u64),
}

impl Value {
    fn pair(&self) -> [f64; 2] {
        match self {
            Value::Nums(v) => *v,
            _ => unreachable!("shape checked before set"),
        }
    }

    fn scalar(&self) -> f64 {
        self.pair()[0]
    }

    fn word(&self) -> &str {
        match self {
            Value::Word(w) => w,
            _ => unreachable!("shape checked before set"),
        }
    }

    fn int(&self) -> u64 {
        match self {
            Value::Int(n) => *n,
            _ => unreachable!("shape checked before set"),
        }
    }
}

/// Everything a config file can set, before assembly into a [`Scenario`].
#[derive(Debug, Clone)]
struct Draft {
    sc: Scenario,
    /// Relative scale of the plant's masses and lengths against the
    /// controller's nominal model.
    model_error: f64,
    dist_kind: String,
    dist_value: [f64; 2],
    dist_amplitude: [f64; 2],
    dist_frequency: [f64; 2],
    dist_phase: [f64; 2],
    dist_viscous: [f64; 2],
    dist_coulomb: [f64; 2],
    dist_cutoff: f64,
    dist_seed: u64,
    filter_enabled: bool,
    filter: FilterSettings,
}

impl Default for Draft {
    fn default() -> Self {
        let (viscous, coulomb) = match DisturbanceModel::friction() {
            DisturbanceModel::ViscousCoulombFriction { viscous, coulomb } => (viscous, coulomb),
            _ => unreachable!(),
        };
        Self {
            sc: Scenario::default(),
            model_error: 0.0,
            dist_kind: DisturbanceModel::friction().name().into(),
            dist_value: [0.5; 2],
            dist_amplitude: [0.5; 2],
            dist_frequency: [2.0; 2],
            dist_phase: [0.0; 2],
            dist_viscous: viscous,
            dist_coulomb: coulomb,
            dist_cutoff: 20.0,
            dist_seed: 0,
            filter_enabled: false,
            filter: FilterSettings::default(),
        }
    }
}

impl Draft {
    fn disturbance(&self) -> DisturbanceModel {
        match self.dist_kind.as_str() {
            "none" => DisturbanceModel::None,
            "constant" => DisturbanceModel::Constant { value: self.dist_value },
            "sinusoid_torque" => DisturbanceModel::SinusoidTorque {
                amplitude: self.dist_amplitude,
                frequency: self.dist_frequency,
                phase: self.dist_phase,
            },
            "band_limited_noise" => DisturbanceModel::BandLimitedNoise {
                amplitude: self.dist_amplitude,
                cutoff: self.dist_cutoff,
                seed: self.dist_seed,
            },
            _ => DisturbanceModel::ViscousCoulombFriction {
                viscous: self.dist_viscous,
                coulomb: self.dist_coulomb,
            },
        }
    }

    fn finish(self) -> Scenario {
        let mut sc = self.sc.clone();
        sc.params_plant = sc.params_controller.perturbed(self.model_error);
        sc.disturbance = self.disturbance();
        sc.filter = self.filter_enabled.then_some(self.filter);
        sc
    }
}

struct Key {
    section: &'static str,
    name: &'static str,
    shape: Shape,
    origin: Origin,
    get: fn(&Draft) -> String,
    set: fn(&mut Draft, &Value),
}

fn show_pair(v: [f64; 2]) -> String {
    format!("{}, {}", v[0], v[1])
}

fn show_word<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}

fn parse_word<T: DeserializeOwned>(w: &str) -> T {
    serde_json::from_value(serde_json::Value::String(w.into())).expect("word checked against choices")
}

const SECTIONS: [&str; 8] = [
    "robot",
    "controller.smc",
    "controller.nismc",
    "controller.hnismc",
    "reference",
    "disturbance",
    "sim",
    "filter",
];

const DIST_KINDS: &[&str] = &[
    "none",
    "constant",
    "sinusoid_torque",
    "viscous_coulomb_friction",
    "band_limited_noise",
];

use Origin::{Artifact, Published};
use Shape::{Integer, Pair, Scalar, Word};

#[rustfmt::skip]
const KEYS: &[Key] = &[
    Key { section: "robot", name: "m1", shape: Scalar(Unit::Mass, Sign::Positive), origin: Published,
          get: |d| d.sc.params_controller.m1.to_string(), set: |d, v| d.sc.params_controller.m1 = v.scalar() },
    Key { section: "robot", name: "m2", shape: Scalar(Unit::Mass, Sign::Positive), origin: Published,
          get: |d| d.sc.params_controller.m2.to_string(), set: |d, v| d.sc.params_controller.m2 = v.scalar() },
    Key { section: "robot", name: "l1", shape: Scalar(Unit::Length, Sign::Positive), origin: Published,
          get: |d| d.sc.params_controller.l1.to_string(), set: |d, v| d.sc.params_controller.l1 = v.scalar() },
    Key { section: "robot", name: "l2", shape: Scalar(Unit::Length, Sign::Positive), origin: Published,
          get: |d| d.sc.params_controller.l2.to_string(), set: |d, v| d.sc.params_controller.l2 = v.scalar() },
    Key { section: "robot", name: "gravity", shape: Scalar(Unit::None, Sign::NonNegative), origin: Artifact,
          get: |d| d.sc.params_controller.gravity.to_string(), set: |d, v| d.sc.params_controller.gravity = v.scalar() },
    Key { section: "robot", name: "model_error", shape: Scalar(Unit::None, Sign::Any), origin: Artifact,
          get: |d| d.model_error.to_string(), set: |d, v| d.model_error = v.scalar() },
    Key { section: "robot", name: "coriolis", shape: Word(&["paper", "christoffel"]), origin: Artifact,
          get: |d| show_word(&d.sc.coriolis_mode), set: |d, v| d.sc.coriolis_mode = parse_word(v.word()) },

    Key { section: "controller.smc", name: "lambda", shape: Pair(Unit::None, Sign::Positive), origin: Published,
          get: |d| d.sc.gains.smc.lambda.to_string(), set: |d, v| d.sc.gains.smc.lambda = Diag2(v.pair()) },
    Key { section: "controller.smc", name: "gamma", shape: Pair(Unit::None, Sign::Positive), origin: Published,
          get: |d| d.sc.gains.smc.gamma.to_string(), set: |d, v| d.sc.gains.smc.gamma = Diag2(v.pair()) },

    Key { section: "controller.nismc", name: "alpha", shape: Pair(Unit::None, Sign::Positive), origin: Published,
          get: |d| d.sc.gains.nismc.alpha.to_string(), set: |d, v| d.sc.gains.nismc.alpha = Diag2(v.pair()) },
    Key { section: "controller.nismc", name: "beta", shape: Pair(Unit::None, Sign::Positive), origin: Published,
          get: |d| d.sc.gains.nismc.beta.to_string(), set: |d, v| d.sc.gains.nismc.beta = Diag2(v.pair()) },
    Key { section: "controller.nismc", name: "gamma", shape: Pair(Unit::None, Sign::Positive), origin: Published,
          get: |d| d.sc.gains.nismc.gamma.to_string(), set: |d, v| d.sc.gains.nismc.gamma = Diag2(v.pair()) },

    Key { section: "controller.hnismc", name: "alpha", shape: Pair(Unit::None, Sign::Positive), origin: Published,
          get: |d| d.sc.gains.hnismc.base.alpha.to_string(), set: |d, v| d.sc.gains.hnismc.base.alpha = Diag2(v.pair()) },
    Key { section: "controller.hnismc", name: "beta", shape: Pair(Unit::None, Sign::Positive), origin: Published,
          get: |d| d.sc.gains.hnismc.base.beta.to_string(), set: |d, v| d.sc.gains.hnismc.base.beta = Diag2(v.pair()) },
    Key { section: "controller.hnismc", name: "gamma", shape: Pair(Unit::None, Sign::Positive), origin: Published,
          get: |d| d.sc.gains.hnismc.base.gamma.to_string(), set: |d, v| d.sc.gains.hnismc.base.gamma = Diag2(v.pair()) },
    Key { section: "controller.hnismc", name: "xi1", shape: Pair(Unit::None, Sign::NonNegative), origin: Published,
          get: |d| d.sc.gains.hnismc.xi1.to_string(), set: |d, v| d.sc.gains.hnismc.xi1 = Diag2(v.pair()) },
    Key { section: "controller.hnismc", name: "xi2", shape: Pair(Unit::None, Sign::NonNegative), origin: Published,
          get: |d| d.sc.gains.hnismc.xi2.to_string(), set: |d, v| d.sc.gains.hnismc.xi2 = Diag2(v.pair()) },

    Key { section: "reference", name: "kind", shape: Word(&["sinusoid", "step", "hold"]), origin: Artifact,
          get: |d| show_word(&d.sc.reference.kind), set: |d, v| d.sc.reference.kind = parse_word(v.word()) },
    Key { section: "reference", name: "amplitude", shape: Pair(Unit::Angle, Sign::Any), origin: Artifact,
          get: |d| show_pair(d.sc.reference.amplitude), set: |d, v| d.sc.reference.amplitude = v.pair() },
    Key { section: "reference", name: "frequency", shape: Pair(Unit::Frequency, Sign::NonNegative), origin: Artifact,
          get: |d| show_pair(d.sc.reference.frequency), set: |d, v| d.sc.reference.frequency = v.pair() },
    Key { section: "reference", name: "phase", shape: Pair(Unit::Angle, Sign::Any), origin: Artifact,
          get: |d| show_pair(d.sc.reference.phase), set: |d, v| d.sc.reference.phase = v.pair() },
    Key { section: "reference", name: "offset", shape: Pair(Unit::Angle, Sign::Any), origin: Artifact,
          get: |d| show_pair(d.sc.reference.offset), set: |d, v| d.sc.reference.offset = v.pair() },
    Key { section: "reference", name: "step_time", shape: Scalar(Unit::Time, Sign::NonNegative), origin: Artifact,
          get: |d| d.sc.reference.step_time.to_string(), set: |d, v| d.sc.reference.step_time = v.scalar() },

    Key { section: "disturbance", name: "kind", shape: Word(DIST_KINDS), origin: Artifact,
          get: |d| d.dist_kind.clone(), set: |d, v| d.dist_kind = v.word().into() },
    Key { section: "disturbance", name: "value", shape: Pair(Unit::None, Sign::Any), origin: Artifact,
          get: |d| show_pair(d.dist_value), set: |d, v| d.dist_value = v.pair() },
    Key { section: "disturbance", name: "amplitude", shape: Pair(Unit::None, Sign::NonNegative), origin: Artifact,
          get: |d| show_pair(d.dist_amplitude), set: |d, v| d.dist_amplitude = v.pair() },
    Key { section: "disturbance", name: "frequency", shape: Pair(Unit::Frequency, Sign::NonNegative), origin: Artifact,
          get: |d| show_pair(d.dist_frequency), set: |d, v| d.dist_frequency = v.pair() },
    Key { section: "disturbance", name: "phase", shape: Pair(Unit::Angle, Sign::Any), origin: Artifact,
          get: |d| show_pair(d.dist_phase), set: |d, v| d.dist_phase = v.pair() },
    Key { section: "disturbance", name: "viscous", shape: Pair(Unit::None, Sign::NonNegative), origin: Artifact,
          get: |d| show_pair(d.dist_viscous), set: |d, v| d.dist_viscous = v.pair() },
    Key { section: "disturbance", name: "coulomb", shape: Pair(Unit::None, Sign::NonNegative), origin: Artifact,
          get: |d| show_pair(d.dist_coulomb), set: |d, v| d.dist_coulomb = v.pair() },
    Key { section: "disturbance", name: "cutoff", shape: Scalar(Unit::Frequency, Sign::Positive), origin: Artifact,
          get: |d| d.dist_cutoff.to_string(), set: |d, v| d.dist_cutoff = v.scalar() },
    Key { section: "disturbance", name: "seed", shape: Integer, origin: Artifact,
          get: |d| d.dist_seed.to_string(), set: |d, v| d.dist_seed = v.int() },

    Key { section: "sim", name: "controller", shape: Word(&["smc", "nismc", "hnismc"]), origin: Artifact,
          get: |d| d.sc.controller.name().into(), set: |d, v| d.sc.controller = parse_word(v.word()) },
    Key { section: "sim", name: "t_end", shape: Scalar(Unit::Time, Sign::Positive), origin: Artifact,
          get: |d| d.sc.t_end.to_string(), set: |d, v| d.sc.t_end = v.scalar() },
    Key { section: "sim", name: "dt_plant", shape: Scalar(Unit::Time, Sign::Positive), origin: Artifact,
          get: |d| d.sc.dt_plant.to_string(), set: |d, v| d.sc.dt_plant = v.scalar() },
    Key { section: "sim", name: "dt_control", shape: Scalar(Unit::Time, Sign::Positive), origin: Artifact,
          get: |d| d.sc.dt_control.to_string(), set: |d, v| d.sc.dt_control = v.scalar() },
    Key { section: "sim", name: "switch", shape: Word(&["sign", "saturation", "tanh"]), origin: Artifact,
          get: |d| show_word(&d.sc.switch.kind), set: |d, v| d.sc.switch.kind = parse_word(v.word()) },
    Key { section: "sim", name: "boundary", shape: Scalar(Unit::None, Sign::Positive), origin: Artifact,
          get: |d| d.sc.switch.boundary.to_string(), set: |d, v| d.sc.switch.boundary = v.scalar() },
    Key { section: "sim", name: "reaching_arg", shape: Word(&["error", "sigma"]), origin: Artifact,
          get: |d| show_word(&d.sc.switch.reaching), set: |d, v| d.sc.switch.reaching = parse_word(v.word()) },
    Key { section: "sim", name: "initial_q", shape: Pair(Unit::Angle, Sign::Any), origin: Artifact,
          get: |d| show_pair(d.sc.initial.q.into()), set: |d, v| d.sc.initial.q = v.pair().into() },
    Key { section: "sim", name: "initial_qdot", shape: Pair(Unit::None, Sign::Any), origin: Artifact,
          get: |d| show_pair(d.sc.initial.qdot.into()), set: |d, v| d.sc.initial.qdot = v.pair().into() },

    Key { section: "filter", name: "enabled", shape: Word(&["true", "false"]), origin: Artifact,
          get: |d| d.filter_enabled.to_string(), set: |d, v| d.filter_enabled = v.word() == "true" },
    Key { section: "filter", name: "preset", shape: Word(&["measurement", "current"]), origin: Artifact,
          get: |_| "measurement".into(),
          set: |d, v| d.filter.params = if v.word() == "current" { FilterParams::current() } else { FilterParams::measurement() } },
    Key { section: "filter", name: "zeta", shape: Scalar(Unit::None, Sign::Positive), origin: Published,
          get: |d| d.filter.params.zeta.to_string(), set: |d, v| d.filter.params.zeta = v.scalar() },
    Key { section: "filter", name: "omega0", shape: Scalar(Unit::Frequency, Sign::Positive), origin: Published,
          get: |d| d.filter.params.omega0.to_string(), set: |d, v| d.filter.params.omega0 = v.scalar() },
    Key { section: "filter", name: "sample_dt", shape: Scalar(Unit::Time, Sign::Positive), origin: Artifact,
          get: |d| d.filter.params.sample_dt.to_string(), set: |d, v| d.filter.params.sample_dt = v.scalar() },
    Key { section: "filter", name: "position", shape: Word(&["true", "false"]), origin: Artifact,
          get: |d| d.filter.position.to_string(), set: |d, v| d.filter.position = v.word() == "true" },
    Key { section: "filter", name: "velocity", shape: Word(&["true", "false"]), origin: Artifact,
          get: |d| d.filter.velocity.to_string(), set: |d, v| d.filter.velocity = v.word() == "true" },
];

fn find_key(section: &str, name: &str) -> Option<&'static Key> {
    KEYS.iter().find(|k| k.section == section && k.name == name)
}

/// Splits `320mm` / `320 mm` / `1e-4s` into number and unit label.
fn split_number(token: &str) -> Option<(f64, &str)> {
    (1..=token.len())
        .rev()
        .filter(|&k| token.is_char_boundary(k))
        .find_map(|k| token[..k].trim().parse::<f64>().ok().map(|v| (v, token[k..].trim())))
}

struct Located<'a> {
    line: usize,
    col: usize,
    key: &'a str,
}

fn parse_value(key: &Key, raw: &str, at: &Located) -> Result<Value, ConfigError> {
    let unit_err = |msg: String, remedy: String| ConfigError::Unit {
        line: at.line,
        key: format!("{}.{}", key.section, key.name),
        msg,
        remedy,
    };
    let parse_err = |msg: String, remedy: String| ConfigError::Parse {
        line: at.line,
        col: at.col,
        msg,
        remedy,
    };
    match key.shape {
        Shape::Word(choices) => {
            let w = raw.trim().to_ascii_lowercase();
            if choices.contains(&w.as_str()) {
                Ok(Value::Word(w))
            } else {
                Err(parse_err(
                    format!("'{}' is not a valid {}", raw.trim(), at.key),
                    format!("use one of: {}", choices.join(", ")),
                ))
            }
        }
        Shape::Integer => raw.trim().parse::<u64>().map(Value::Int).map_err(|_| {
            parse_err(
                format!("'{}' is not a nonnegative integer", raw.trim()),
                format!("write e.g. `{} = 42`", at.key),
            )
        }),
        Shape::Scalar(unit, sign) | Shape::Pair(unit, sign) => {
            let tokens: Vec<&str> = raw.split(',').map(str::trim).collect();
            let max = if matches!(key.shape, Shape::Pair(..)) { 2 } else { 1 };
            if tokens.len() > max {
                return Err(parse_err(
                    format!("'{}' takes at most {max} value(s), got {}", at.key, tokens.len()),
                    if max == 1 {
                        "give a single number".into()
                    } else {
                        "give one value for both joints or two comma-separated values".into()
                    },
                ));
            }
            let mut out = [0.0; 2];
            for (i, tok) in tokens.iter().enumerate() {
                let (v, label) = split_number(tok).ok_or_else(|| {
                    parse_err(
                        format!("expected a number, found '{tok}'"),
                        format!("write e.g. `{} = 1.5`", at.key),
                    )
                })?;
                if !v.is_finite() {
                    return Err(parse_err(format!("'{tok}' is not finite"), "use a finite number".into()));
                }
                let factor = unit.factor(label).ok_or_else(|| {
                    unit_err(
                        format!("unit '{label}' not accepted"),
                        format!("use {} (or no unit for SI)", unit.accepted()),
                    )
                })?;
                let v = v * factor;
                let bad = match sign {
                    Sign::Any => None,
                    Sign::Positive => (v <= 0.0).then_some("> 0"),
                    Sign::NonNegative => (v < 0.0).then_some(">= 0"),
                };
                if let Some(req) = bad {
                    return Err(unit_err(
                        format!("must be {req}, got {tok}"),
                        format!("give {} a value {req}", at.key),
                    ));
                }
                out[i] = v;
            }
            if tokens.len() == 1 {
                out[1] = out[0];
            }
            Ok(Value::Nums(out))
        }
    }
}

/// Parses configuration text into a validated scenario.
pub fn parse_config_str(text: &str) -> Result<Scenario, ConfigError> {
    let mut draft = Draft::default();
    let mut section: Option<&str> = None;
    let mut seen: HashMap<(&str, &str), usize> = HashMap::new();

    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        let body = full.split(['#', ';']).next().unwrap_or("");
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = body.len() - body.trim_start().len();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Parse {
                line,
                col: indent + 1,
                msg: "section header is missing ']'".into(),
                remedy: "write headers as `[section]`".into(),
            })?;
            let name = name.trim();
            section = Some(SECTIONS.iter().copied().find(|s| *s == name).ok_or_else(|| ConfigError::Parse {
                line,
                col: indent + 2,
                msg: format!("unknown section [{name}]"),
                remedy: format!("valid sections are {}", SECTIONS.map(|s| format!("[{s}]")).join(", ")),
            })?);
            continue;
        }
        let Some(eq) = body.find('=') else {
            return Err(ConfigError::Parse {
                line,
                col: indent + 1,
                msg: format!("expected `key = value`, found '{trimmed}'"),
                remedy: "write one `key = value` per line".into(),
            });
        };
        let name = body[..eq].trim();
        let value_col = eq + 2 + (body[eq + 1..].len() - body[eq + 1..].trim_start().len());
        let Some(sec) = section else {
            return Err(ConfigError::Parse {
                line,
                col: indent + 1,
                msg: format!("key '{name}' appears before any section"),
                remedy: "start the file with a section header such as `[robot]`".into(),
            });
        };
        if name.is_empty() {
            return Err(ConfigError::Parse {
                line,
                col: indent + 1,
                msg: "missing key before '='".into(),
                remedy: "write one `key = value` per line".into(),
            });
        }
        let key = find_key(sec, name).ok_or_else(|| {
            let known: Vec<_> = KEYS.iter().filter(|k| k.section == sec).map(|k| k.name).collect();
            ConfigError::UnknownKey {
                line,
                section: sec.into(),
                key: name.into(),
                remedy: format!("keys in [{sec}] are {}", known.join(", ")),
            }
        })?;
        if let Some(prev) = seen.insert((key.section, key.name), line) {
            return Err(ConfigError::Parse {
                line,
                col: indent + 1,
                msg: format!("'{name}' already set on line {prev}"),
                remedy: "keep a single assignment per key".into(),
            });
        }
        let at = Located {
            line,
            col: value_col,
            key: name,
        };
        let value = parse_value(key, &body[eq + 1..], &at)?;
        (key.set)(&mut draft, &value);
    }

    for key in KEYS {
        if !seen.contains_key(&(key.section, key.name)) {
            log::info!("[{}] {} = {} ({})", key.section, key.name, (key.get)(&draft), key.origin);
        }
    }
    let sc = draft.finish();
    for w in sc.validate()? {
        log::warn!("{w}");
    }
    Ok(sc)
}

pub fn parse_config(path: &Path) -> Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text)
}

/// Default configuration with every key spelled out, for `arm-smc config`.
pub fn default_config_text() -> String {
    let draft = Draft::default();
    let mut out = String::new();
    for sec in SECTIONS {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&format!("[{sec}]\n"));
        for key in KEYS.iter().filter(|k| k.section == sec) {
            let value = (key.get)(&draft);
            let value = value
                .strip_prefix("diag{")
                .and_then(|v| v.strip_suffix('}'))
                .unwrap_or(&value)
                .to_string();
            out.push_str(&format!("{} = {}\n", key.name, value));
        }
    }
    out
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::ControllerKind;
    use crate::sim::ReferenceKind;

    #[test]
    fn empty_file_gives_defaults() {
        let sc = parse_config_str("").unwrap();
        assert_eq!(sc, Scenario::default());
        assert_eq!(sc.gains.smc.lambda, Diag2([50.0; 2]));
        assert_eq!(sc.gains.nismc.beta, Diag2([800.0; 2]));
        assert_eq!(sc.gains.hnismc.xi1, Diag2([0.05; 2]));
        assert_eq!(sc.params_plant.l2, 0.36);
        assert_eq!(sc.params_plant.m1, 0.386);
    }

    #[test]
    fn comments_only_is_empty() {
        let sc = parse_config_str("# nothing\n\n  ; still nothing\n[robot]\n").unwrap();
        assert_eq!(sc, Scenario::default());
    }

    #[test]
    fn units_convert_to_si() {
        let sc = parse_config_str("[robot]\nl1 = 320mm\nl2 = 36 cm\nm1 = 386g\nm2 = 0.722kg\n").unwrap();
        assert!((sc.params_plant.l1 - 0.32).abs() < 1e-15);
        assert!((sc.params_plant.l2 - 0.36).abs() < 1e-15);
        assert!((sc.params_plant.m1 - 0.386).abs() < 1e-15);
        assert_eq!(sc.params_plant.m2, 0.722);
        let sc = parse_config_str("[sim]\ndt_plant = 50us\nt_end = 1500ms\n").unwrap();
        assert!((sc.dt_plant - 5e-5).abs() < 1e-18);
        assert_eq!(sc.t_end, 1.5);
        let sc = parse_config_str("[reference]\namplitude = 90deg, 0.1\nfrequency = 1hz\n").unwrap();
        assert!((sc.reference.amplitude[0] - PI / 2.0).abs() < 1e-15);
        assert_eq!(sc.reference.amplitude[1], 0.1);
        assert!((sc.reference.frequency[1] - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn pairs_and_words() {
        let text = "[controller.smc]\nlambda = 40, 60\n[sim]\ncontroller = SMC\nswitch = tanh\n\
                    [reference]\nkind = step\n[disturbance]\nkind = band_limited_noise\nseed = 9\n\
                    [filter]\nenabled = true\n";
        let sc = parse_config_str(text).unwrap();
        assert_eq!(sc.gains.smc.lambda, Diag2([40.0, 60.0]));
        assert_eq!(sc.controller, ControllerKind::Smc);
        assert_eq!(sc.reference.kind, ReferenceKind::Step);
        assert!(matches!(sc.disturbance, DisturbanceModel::BandLimitedNoise { seed: 9, .. }));
        assert_eq!(sc.filter, Some(FilterSettings::default()));
    }

    #[test]
    fn negative_gain_is_unit_error_naming_key() {
        let err = parse_config_str("[controller.smc]\nlambda = -5\n").unwrap_err();
        match &err {
            ConfigError::Unit { key, line, .. } => {
                assert_eq!(key, "controller.smc.lambda");
                assert_eq!(*line, 2);
            }
            other => panic!("{other:?}"),
        }
        assert!(err.to_string().contains("help:"));
        assert!(matches!(
            parse_config_str("[robot]\nm1 = -1g\n"),
            Err(ConfigError::Unit { .. })
        ));
        assert!(matches!(
            parse_config_str("[robot]\nl1 = 3 furlongs\n"),
            Err(ConfigError::Unit { .. })
        ));
    }

    #[test]
    fn unknown_key_and_section() {
        let err = parse_config_str("[robot]\nlenght1 = 3\n").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { line: 2, .. }), "{err}");
        assert!(err.to_string().contains("l1"));
        let err = parse_config_str("[robto]\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 1, col: 2, .. }), "{err}");
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_config_str("[sim]\n  t_end 3\n").unwrap_err() {
            ConfigError::Parse { line, col, .. } => assert_eq!((line, col), (2, 3)),
            other => panic!("{other:?}"),
        }
        match parse_config_str("[sim]\nt_end =  abc\n").unwrap_err() {
            ConfigError::Parse { line, col, .. } => assert_eq!((line, col), (2, 10)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_config_str("l1 = 3\n"), Err(ConfigError::Parse { .. })));
        assert!(matches!(parse_config_str("[robot\n"), Err(ConfigError::Parse { .. })));
        assert!(matches!(
            parse_config_str("[sim]\nt_end = 1\nt_end = 2\n"),
            Err(ConfigError::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_config_str("[sim]\nswitch = bang\n"),
            Err(ConfigError::Parse { .. })
        ));
        assert!(matches!(
            parse_config_str("[sim]\nt_end = 1, 2\n"),
            Err(ConfigError::Parse { .. })
        ));
    }

    #[test]
    fn scenario_level_checks_still_apply() {
        let err = parse_config_str("[sim]\ndt_plant = 1ms\ndt_control = 0.1ms\n").unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)), "{err}");
    }

    #[test]
    fn model_error_scales_plant_only() {
        let sc = parse_config_str("[robot]\nmodel_error = 0.1\n").unwrap();
        assert_eq!(sc.params_controller.m1, 0.386);
        assert!((sc.params_plant.m1 - 0.386 * 1.1).abs() < 1e-15);
    }

    #[test]
    fn default_text_round_trips() {
        let text = default_config_text();
        assert_eq!(parse_config_str(&text).unwrap(), Scenario::default());
        for s in SECTIONS {
            assert!(text.contains(&format!("[{s}]")));
        }
    }
}
