//! Flat `key = value` experiment configs. `#` starts a comment; one
//! experiment per file.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::core_model::OracleStyle;
use crate::error::{PaeError, Result};
use crate::pae_driver::{Backend, LMode, ScheduleOptions, Strategy};
use crate::rpe::{NuVariant, BETA_MAX};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    RmseVsQueries,
    RmseVsDepth,
    BiasSweep,
    TlCurve,
    SingleRun,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::RmseVsQueries => "rmse_vs_queries",
            ExperimentKind::RmseVsDepth => "rmse_vs_depth",
            ExperimentKind::BiasSweep => "bias_sweep",
            ExperimentKind::TlCurve => "tl_curve",
            ExperimentKind::SingleRun => "single_run",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            ExperimentKind::RmseVsQueries,
            ExperimentKind::RmseVsDepth,
            ExperimentKind::BiasSweep,
            ExperimentKind::TlCurve,
            ExperimentKind::SingleRun,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

/// How the T/S split is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TCap {
    /// Strategy default (general mode caps at 8, the others never split).
    Auto,
    Off,
    Cap(u64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub amplitudes: Vec<f64>,
    pub k_min: u32,
    pub k_max: u32,
    pub strategies: Vec<Strategy>,
    pub nu: NuVariant,
    pub l_mode: LMode,
    pub t_cap: TCap,
    pub trials: u32,
    pub backend: Backend,
    pub n: usize,
    pub shots: u64,
    pub l_values: Vec<usize>,
    pub t_values: Vec<f64>,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::RmseVsQueries,
            amplitudes: vec![0.0, (std::f64::consts::PI / 8.0).sin().powi(2)],
            k_min: 1,
            k_max: 9,
            strategies: vec![Strategy::FullSequential],
            nu: NuVariant::Optimized { nu_k: 7 },
            l_mode: LMode::Empirical,
            t_cap: TCap::Auto,
            trials: 100,
            backend: Backend::Analytic,
            n: 2,
            shots: 100_000,
            l_values: Vec::new(),
            t_values: Vec::new(),
            seed: 1,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn schedule_options(&self, strategy: Strategy) -> ScheduleOptions {
        let mut o = ScheduleOptions::new(strategy, self.nu, self.l_mode.clone());
        match self.t_cap {
            TCap::Auto => {}
            TCap::Off => o.t_cap = None,
            TCap::Cap(c) => o.t_cap = Some(c),
        }
        o
    }

    pub fn validate(&self) -> Result<()> {
        let bad =
            |field: &str, msg: String| Err(PaeError::Config(format!("field `{field}`: {msg}")));
        if self.trials == 0 {
            return bad("trials", "must be at least 1".into());
        }
        if self.k_min == 0 || self.k_min > self.k_max {
            return bad(
                "k_min",
                format!(
                    "need 1 <= k_min <= k_max, got {}..{}",
                    self.k_min, self.k_max
                ),
            );
        }
        if self.k_max > 40 {
            return bad("k_max", format!("{} is too large", self.k_max));
        }
        if let Some(a) = self.amplitudes.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return bad("amplitudes", format!("{a} outside [0, 1]"));
        }
        if self.n < 2 {
            return bad("n", format!("oracle needs n >= 2, got {}", self.n));
        }
        if self.strategies.is_empty() {
            return bad("strategy", "at least one strategy required".into());
        }
        if let NuVariant::Theoretical { beta } = self.nu {
            if !(beta > 0.0 && beta < BETA_MAX) {
                return bad("beta", format!("{beta} outside (0, √6/8)"));
            }
        }
        if let Some(l) = self.l_values.iter().find(|l| **l == 0 || **l % 2 == 1) {
            return bad("l_values", format!("{l} is not a positive even integer"));
        }
        if self.shots == 0 {
            return bad("shots", "must be positive".into());
        }
        if let Some(t) = self.t_values.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return bad("t_values", format!("{t} must be positive"));
        }
        Ok(())
    }
}

pub fn strategy_name(s: Strategy) -> String {
    match s {
        Strategy::FullParallel => "full_parallel".into(),
        Strategy::FullSequential => "full_sequential".into(),
        Strategy::General { p } => format!("general:{p}"),
    }
}

fn parse_strategy(s: &str) -> std::result::Result<Strategy, String> {
    match s {
        "full_parallel" => Ok(Strategy::FullParallel),
        "full_sequential" => Ok(Strategy::FullSequential),
        _ => match s.strip_prefix("general:") {
            Some(p) => p
                .parse()
                .map(|p| Strategy::General { p })
                .map_err(|e| format!("{e}")),
            None => Err(format!("unknown strategy `{s}`")),
        },
    }
}

fn backend_str(b: Backend) -> String {
    match b {
        Backend::Analytic => "analytic".into(),
        Backend::Ideal => "ideal".into(),
        Backend::Statevector(OracleStyle::Canonical) => "statevector".into(),
        Backend::Statevector(OracleStyle::Random(s)) => format!("statevector:random:{s}"),
    }
}

pub fn parse_backend(s: &str) -> std::result::Result<Backend, String> {
    match s {
        "analytic" => Ok(Backend::Analytic),
        "ideal" => Ok(Backend::Ideal),
        "statevector" => Ok(Backend::Statevector(OracleStyle::Canonical)),
        _ => match s.strip_prefix("statevector:random:") {
            Some(seed) => seed
                .parse()
                .map(|x| Backend::Statevector(OracleStyle::Random(x)))
                .map_err(|e| format!("{e}")),
            None => Err(format!("unknown backend `{s}`")),
        },
    }
}

fn list<T: ToString>(v: &[T]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn parse_list<T: std::str::FromStr>(s: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<T>()
                .map_err(|e| format!("`{}`: {e}", x.trim()))
        })
        .collect()
}

/// `grid(N)` expands to N evenly spaced points on [0, 1].
fn parse_amplitudes(s: &str) -> std::result::Result<Vec<f64>, String> {
    if let Some(inner) = s.strip_prefix("grid(").and_then(|r| r.strip_suffix(')')) {
        let n: usize = inner.trim().parse().map_err(|e| format!("{e}"))?;
        if n < 2 {
            return Err("grid needs at least 2 points".into());
        }
        return Ok((0..n).map(|i| i as f64 / (n - 1) as f64).collect());
    }
    parse_list(s)
}

pub fn serialize(cfg: &ExperimentConfig) -> String {
    let mut o = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(o, "{k} = {v}");
    };
    kv("experiment", cfg.kind.name().into());
    kv("amplitudes", list(&cfg.amplitudes));
    kv("k_min", cfg.k_min.to_string());
    kv("k_max", cfg.k_max.to_string());
    kv(
        "strategy",
        cfg.strategies
            .iter()
            .map(|s| strategy_name(*s))
            .collect::<Vec<_>>()
            .join(", "),
    );
    match cfg.nu {
        NuVariant::Optimized { nu_k } => {
            kv("nu_variant", "optimized".into());
            kv("nu_k", nu_k.to_string());
        }
        NuVariant::Theoretical { beta } => {
            kv("nu_variant", "theoretical".into());
            kv("beta", beta.to_string());
        }
    }
    match &cfg.l_mode {
        LMode::Empirical => kv("l_mode", "empirical".into()),
        LMode::S5 => kv("l_mode", "s5".into()),
        LMode::Certified { beta } => kv("l_mode", format!("certified:{beta}")),
        LMode::Table(v) => kv("l_mode", format!("table:{}", list(v))),
    }
    kv(
        "t_cap",
        match cfg.t_cap {
            TCap::Auto => "auto".into(),
            TCap::Off => "off".into(),
            TCap::Cap(c) => c.to_string(),
        },
    );
    kv("trials", cfg.trials.to_string());
    kv("backend", backend_str(cfg.backend));
    kv("n", cfg.n.to_string());
    kv("shots", cfg.shots.to_string());
    kv("l_values", list(&cfg.l_values));
    kv("t_values", list(&cfg.t_values));
    kv("seed", cfg.seed.to_string());
    if let Some(p) = &cfg.output {
        kv("output", p.display().to_string());
    }
    o
}

pub fn parse(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut seen_kind = false;
    let mut nu_variant = "optimized".to_string();
    let mut nu_k = 7u64;
    let mut beta = 0.05f64;
    let mut seen = std::collections::HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let err = |key: &str, msg: String| {
            PaeError::Config(format!("line {lineno}, field `{key}`: {msg}"))
        };
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| PaeError::Config(format!("line {lineno}: expected `key = value`")))?;
        if !seen.insert(key.to_string()) {
            return Err(err(key, "given twice".into()));
        }
        let num = |v: &str| -> Result<u64> { v.parse().map_err(|e| err(key, format!("{e}"))) };
        match key {
            "experiment" => {
                if seen_kind {
                    return Err(err(key, "one experiment per file".into()));
                }
                seen_kind = true;
                cfg.kind = ExperimentKind::parse(value)
                    .ok_or_else(|| err(key, format!("unknown experiment `{value}`")))?;
            }
            "amplitudes" => cfg.amplitudes = parse_amplitudes(value).map_err(|e| err(key, e))?,
            "k_min" => cfg.k_min = num(value)? as u32,
            "k_max" => cfg.k_max = num(value)? as u32,
            "strategy" => {
                cfg.strategies = value
                    .split(',')
                    .map(|s| parse_strategy(s.trim()))
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| err(key, e))?
            }
            "nu_variant" => nu_variant = value.to_string(),
            "nu_k" => nu_k = num(value)?,
            "beta" => beta = value.parse().map_err(|e| err(key, format!("{e}")))?,
            "l_mode" => {
                cfg.l_mode = match value {
                    "empirical" => LMode::Empirical,
                    "s5" => LMode::S5,
                    _ => {
                        if let Some(b) = value.strip_prefix("certified:") {
                            LMode::Certified {
                                beta: b.parse().map_err(|e| err(key, format!("{e}")))?,
                            }
                        } else if let Some(t) = value.strip_prefix("table:") {
                            LMode::Table(parse_list(t).map_err(|e| err(key, e))?)
                        } else {
                            return Err(err(key, format!("unknown L mode `{value}`")));
                        }
                    }
                }
            }
            "t_cap" => {
                cfg.t_cap = match value {
                    "auto" => TCap::Auto,
                    "off" => TCap::Off,
                    _ => TCap::Cap(num(value)?),
                }
            }
            "trials" => cfg.trials = num(value)? as u32,
            "backend" => cfg.backend = parse_backend(value).map_err(|e| err(key, e))?,
            "n" => cfg.n = num(value)? as usize,
            "shots" => cfg.shots = num(value)?,
            "l_values" => cfg.l_values = parse_list(value).map_err(|e| err(key, e))?,
            "t_values" => cfg.t_values = parse_list(value).map_err(|e| err(key, e))?,
            "seed" => cfg.seed = num(value)?,
            "output" => cfg.output = Some(PathBuf::from(value)),
            _ => return Err(err(key, "unknown key".into())),
        }
    }
    if !seen_kind {
        return Err(PaeError::Config("missing `experiment` key".into()));
    }
    cfg.nu = match nu_variant.as_str() {
        "optimized" => NuVariant::Optimized { nu_k },
        "theoretical" => NuVariant::Theoretical { beta },
        other => {
            return Err(PaeError::Config(format!(
                "field `nu_variant`: unknown `{other}`"
            )))
        }
    };
    cfg.validate()?;
    Ok(cfg)
}
