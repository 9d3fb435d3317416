//! The `key = value` configuration format.
//!
//! ```text
//! # reservoir
//! dist = beta
//! alpha = 1
//! K = 5000
//! T_max = 50000
//! N = 200
//! beta = 10          # default for every policy section
//!
//! [prose]
//! policy = prose
//!
//! [ose-theory]
//! policy = ose
//! beta_schedule = theoretical
//! delta = 0.1
//! ```
//!
//! Keys before the first `[label]` header are global; each header starts a
//! policy section whose label names the policy in the output files. `#`
//! starts a comment, values may be quoted, and numbers are parsed with the
//! C locale rules of Rust's `str::parse`.

use std::collections::BTreeMap;
use std::fmt;

use crate::harness::{ExperimentConfig, Metric, PolicyEntry};
use crate::policies::{IndexEngine, PolicyConfig, PolicyKind};
use crate::theory::{ComplexityContext, DEFAULT_ETA_MIN, DEFAULT_POINTS_PER_DECADE};
use crate::{ArmSupply, BetaSchedule, QuantileSpec};

/// Global keys and their meaning, as listed by `--help`.
pub const GLOBAL_KEYS: &[(&str, &str)] = &[
    ("dist", "reservoir family: bernoulli | beta | pareto | poly"),
    ("alpha", "shape of beta, pareto and poly reservoirs"),
    ("u", "top mean of the bernoulli reservoir"),
    ("eta0", "fraction of top arms of the bernoulli reservoir"),
    ("poly_levels", "number of levels of the poly reservoir (default: K)"),
    ("K", "number of arms, or inf (default inf)"),
    ("T_max", "horizon (default 1000)"),
    ("N", "trials per policy (default 1)"),
    ("zeta", "reward noise standard deviation (default 1)"),
    ("seed", "master seed (default 0)"),
    ("checkpoint_ratio", "ratio of the geometric checkpoint grid (default 1.05)"),
    ("checkpoints", "comma list of extra times to record"),
    ("metrics", "comma list of rec_rank, rec_mean, simple_regret, cum_regret, cum_reward"),
    ("threads", "worker pool width (default: MANYARM_THREADS, then all cores)"),
    ("psi", "significance factor for the theory tables (default 1)"),
    ("t_grid", "comma list of times for the theory rank table"),
    ("eta_grid", "smallest rank of the theory grid (default 1e-16)"),
    ("points_per_decade", "theory grid resolution (default 64)"),
    ("beta", "default constant beta for policy sections (default 10)"),
    ("beta_schedule", "default schedule: constant | theoretical"),
    ("delta", "default failure probability of the theoretical schedule (default 0.1)"),
    ("gamma_scope", "default PROSE scope exponent, >= 1 or inf (default 1)"),
];

/// Keys allowed inside a `[label]` section.
pub const SECTION_KEYS: &[(&str, &str)] = &[
    ("policy", "ose | prose | ucb | bsh (default: the section label)"),
    ("beta", "constant beta"),
    ("beta_schedule", "constant | theoretical"),
    ("delta", "failure probability of the theoretical schedule"),
    ("gamma_scope", "PROSE scope exponent, >= 1 or inf"),
    ("index", "PROSE index engine: ranked | reference (default ranked)"),
];

const DEFAULTABLE: &[&str] = &["beta", "beta_schedule", "delta", "gamma_scope"];

/// Every key in the format, for help texts.
pub fn key_help() -> String {
    let mut s = String::from("Config keys (global):\n");
    for (k, d) in GLOBAL_KEYS {
        s.push_str(&format!("  {k:<18} {d}\n"));
    }
    s.push_str("Config keys ([label] policy sections):\n");
    for (k, d) in SECTION_KEYS {
        s.push_str(&format!("  {k:<18} {d}\n"));
    }
    s.push_str("Overrides: --set key=value or --set label.key=value");
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn new(key: Option<&str>, line: Option<usize>, message: impl Into<String>) -> Self {
        ConfigError { key: key.map(str::to_string), line, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.key, self.line) {
            (Some(k), Some(l)) => write!(f, "key `{k}` (line {l}): {}", self.message),
            (Some(k), None) => write!(f, "key `{k}`: {}", self.message),
            (None, Some(l)) => write!(f, "line {l}: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
struct Value {
    text: String,
    line: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
struct Section {
    label: String,
    entries: BTreeMap<String, Value>,
}

/// A parsed but not yet interpreted configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    global: BTreeMap<String, Value>,
    sections: Vec<Section>,
}

fn strip_quotes(v: &str) -> &str {
    let v = v.trim();
    for q in ['"', '\''] {
        if v.len() >= 2 && v.starts_with(q) && v.ends_with(q) {
            return &v[1..v.len() - 1];
        }
    }
    v
}

fn is_known(key: &str, section: bool) -> bool {
    let table = if section { SECTION_KEYS } else { GLOBAL_KEYS };
    table.iter().any(|(k, _)| *k == key)
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RawConfig::default();
        let mut current: Option<usize> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let label = rest
                    .strip_suffix(']')
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .ok_or_else(|| ConfigError::new(None, Some(line), format!("malformed section header {content:?}")))?;
                if cfg.sections.iter().any(|s| s.label == label) {
                    return Err(ConfigError::new(None, Some(line), format!("section [{label}] defined twice")));
                }
                cfg.sections.push(Section { label: label.to_string(), entries: BTreeMap::new() });
                current = Some(cfg.sections.len() - 1);
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::new(None, Some(line), format!("expected `key = value`, got {content:?}")))?;
            let key = k.trim();
            let value = Value { text: strip_quotes(v).to_string(), line: Some(line) };
            let (map, in_section) = match current {
                Some(s) => (&mut cfg.sections[s].entries, true),
                None => (&mut cfg.global, false),
            };
            if !is_known(key, in_section) {
                let place = if in_section { "in a policy section" } else { "at top level" };
                return Err(ConfigError::new(Some(key), Some(line), format!("unknown key {place}")));
            }
            if map.insert(key.to_string(), value).is_some() {
                return Err(ConfigError::new(Some(key), Some(line), "key set twice"));
            }
        }
        Ok(cfg)
    }

    /// Applies `key=value` or `label.key=value`. Unknown labels create a section.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::new(None, None, format!("override {assignment:?} is not key=value")))?;
        let (k, v) = (k.trim(), Value { text: strip_quotes(v).to_string(), line: None });
        if let Some((label, key)) = k.split_once('.') {
            let key = key.trim();
            if !is_known(key, true) {
                return Err(ConfigError::new(Some(k), None, "unknown key in a policy section"));
            }
            let label = label.trim();
            let idx = match self.sections.iter().position(|s| s.label == label) {
                Some(i) => i,
                None => {
                    self.sections.push(Section { label: label.to_string(), entries: BTreeMap::new() });
                    self.sections.len() - 1
                }
            };
            self.sections[idx].entries.insert(key.to_string(), v);
        } else {
            if !is_known(k, false) {
                return Err(ConfigError::new(Some(k), None, "unknown key at top level"));
            }
            self.global.insert(k.to_string(), v);
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.global.get(key)
    }

    fn num<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        self.get(key).map(|v| parse_value(key, v)).transpose()
    }

    fn num_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        Ok(self.num(key)?.unwrap_or(default))
    }

    fn require<T: std::str::FromStr>(&self, key: &str, why: &str) -> Result<T, ConfigError> {
        self.num(key)?.ok_or_else(|| ConfigError::new(Some(key), None, format!("missing, required {why}")))
    }

    fn supply(&self) -> Result<ArmSupply, ConfigError> {
        match self.get("K") {
            None => Ok(ArmSupply::Infinite),
            Some(v) if matches!(v.text.to_ascii_lowercase().as_str(), "inf" | "infinite") => Ok(ArmSupply::Infinite),
            Some(v) => {
                let k: u32 = parse_value("K", v)?;
                if k == 0 {
                    return Err(err_at("K", v, "must be positive"));
                }
                Ok(ArmSupply::Finite(k))
            }
        }
    }

    /// The reservoir described by the global keys.
    pub fn quantile_spec(&self) -> Result<QuantileSpec, ConfigError> {
        let dist = self.get("dist").ok_or_else(|| ConfigError::new(Some("dist"), None, "missing"))?;
        let spec = match dist.text.to_ascii_lowercase().as_str() {
            "bernoulli" => QuantileSpec::BernoulliType {
                u: self.require("u", "for dist = bernoulli")?,
                eta0: self.require("eta0", "for dist = bernoulli")?,
            },
            "beta" => QuantileSpec::Beta { alpha: self.require("alpha", "for dist = beta")? },
            "pareto" => QuantileSpec::Pareto { alpha: self.require("alpha", "for dist = pareto")? },
            "poly" | "polynomial" => {
                let levels = match self.num::<u32>("poly_levels")? {
                    Some(l) => l,
                    None => self.supply()?.limit().ok_or_else(|| {
                        ConfigError::new(Some("poly_levels"), None, "required for dist = poly when K is infinite")
                    })?,
                };
                QuantileSpec::PolynomialDiscrete { alpha: self.require("alpha", "for dist = poly")?, levels }
            }
            other => return Err(err_at("dist", dist, format!("unknown family {other:?}"))),
        };
        spec.validate().map_err(|e| ConfigError::new(Some("dist"), dist.line, e.to_string()))?;
        Ok(spec)
    }

    fn policy(&self, sec: &Section) -> Result<PolicyEntry, ConfigError> {
        let lookup = |key: &str| -> Option<(String, &Value)> {
            if let Some(v) = sec.entries.get(key) {
                return Some((format!("{}.{key}", sec.label), v));
            }
            if DEFAULTABLE.contains(&key) {
                return self.global.get(key).map(|v| (key.to_string(), v));
            }
            None
        };
        let kind_text = match lookup("policy") {
            Some((_, v)) => v.text.clone(),
            None => sec.label.clone(),
        };
        let kind = PolicyKind::parse(&kind_text).map_err(|_| {
            let (k, line) = lookup("policy").map_or((format!("{}.policy", sec.label), None), |(k, v)| (k, v.line));
            ConfigError::new(Some(&k), line, format!("unknown policy {kind_text:?} (expected ose, prose, ucb or bsh)"))
        })?;
        let num = |key: &str, default: f64| -> Result<f64, ConfigError> {
            match lookup(key) {
                Some((k, v)) => parse_value(&k, v),
                None => Ok(default),
            }
        };
        let schedule = lookup("beta_schedule").map_or(("constant".to_string(), None), |(k, v)| (v.text.clone(), Some((k, v.line))));
        let beta = match schedule.0.to_ascii_lowercase().as_str() {
            "constant" => BetaSchedule::Constant { beta: num("beta", 10.0)? },
            "theoretical" => BetaSchedule::Theoretical { delta: num("delta", 0.1)? },
            other => {
                let (k, line) = schedule.1.expect("explicit value");
                return Err(ConfigError::new(Some(&k), line, format!("unknown schedule {other:?}")));
            }
        };
        let engine = match lookup("index").map(|(k, v)| (k, v.text.to_ascii_lowercase(), v.line)) {
            None => IndexEngine::Ranked,
            Some((_, e, _)) if e == "ranked" => IndexEngine::Ranked,
            Some((_, e, _)) if e == "reference" => IndexEngine::Reference,
            Some((k, e, line)) => return Err(ConfigError::new(Some(&k), line, format!("unknown index engine {e:?}"))),
        };
        let config = PolicyConfig { kind, beta, gamma_scope: num("gamma_scope", 1.0)?, engine };
        config
            .validate()
            .map_err(|e| ConfigError::new(Some(&format!("{}.policy", sec.label)), None, e.to_string()))?;
        Ok(PolicyEntry::new(sec.label.clone(), config))
    }

    /// Interprets the configuration for `simulate` and `bench`.
    pub fn experiment(&self) -> Result<ExperimentConfig, ConfigError> {
        let spec = self.quantile_spec()?;
        let supply = self.supply()?;
        if self.sections.is_empty() {
            return Err(ConfigError::new(None, None, "no policy sections; add e.g. `[prose]`"));
        }
        let policies = self.sections.iter().map(|s| self.policy(s)).collect::<Result<Vec<_>, _>>()?;
        let mut cfg = ExperimentConfig::new(spec, supply, self.num_or("T_max", 1000)?, self.num_or("N", 1)?, policies);
        cfg.zeta = self.num_or("zeta", 1.0)?;
        cfg.master_seed = self.num_or("seed", 0)?;
        cfg.checkpoint_ratio = self.num_or("checkpoint_ratio", 1.05)?;
        cfg.threads = self.num("threads")?;
        if let Some(v) = self.get("checkpoints") {
            cfg.extra_checkpoints = v
                .text
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>().ok().filter(|x| x.fract() == 0.0 && *x >= 1.0).map(|x| x as u64)
                    .ok_or_else(|| err_at("checkpoints", v, format!("bad time {s:?}"))))
                .collect::<Result<_, _>>()?;
        }
        if let Some(v) = self.get("metrics") {
            cfg.metrics = v
                .text
                .split(',')
                .map(|m| Metric::parse(m).ok_or_else(|| err_at("metrics", v, format!("unknown metric {:?}", m.trim()))))
                .collect::<Result<_, _>>()?;
        }
        cfg.validate().map_err(|e| ConfigError::new(None, None, e.to_string()))?;
        Ok(cfg)
    }

    /// Interprets the configuration for `theory`.
    pub fn theory(&self) -> Result<(ComplexityContext, Vec<f64>), ConfigError> {
        let spec = self.quantile_spec()?;
        let ctx = ComplexityContext::with_grid(
            spec,
            self.num_or("zeta", 1.0)?,
            self.num_or("psi", 1.0)?,
            self.num_or("points_per_decade", DEFAULT_POINTS_PER_DECADE)?,
            self.num_or("eta_grid", DEFAULT_ETA_MIN)?,
        )
        .map_err(|e| ConfigError::new(None, None, e.to_string()))?;
        let grid = self.get("t_grid").ok_or_else(|| ConfigError::new(Some("t_grid"), None, "missing"))?;
        let ts: Vec<f64> = grid
            .text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| match s.parse::<f64>() {
                Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
                _ => Err(err_at("t_grid", grid, format!("bad time {s:?}"))),
            })
            .collect::<Result<_, _>>()?;
        if ts.is_empty() {
            return Err(err_at("t_grid", grid, "empty"));
        }
        Ok((ctx, ts))
    }
}

fn err_at(key: &str, v: &Value, message: impl Into<String>) -> ConfigError {
    ConfigError::new(Some(key), v.line, message)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &Value) -> Result<T, ConfigError> {
    let text = v.text.trim();
    text.parse()
        .or_else(|e| if matches!(text, "inf" | "infinite") { "inf".parse() } else { Err(e) })
        .map_err(|_| err_at(key, v, format!("cannot parse {text:?}")))
}
