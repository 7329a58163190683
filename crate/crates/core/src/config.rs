//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # backward run, second-order boundary
//! experiment = FdBackwardAsymptotic
//! metric = hyperbolic
//! probes = 0.5, 0.25, 0.1
//! ```
//!
//! Values may be quoted. Lists are comma separated, optionally in brackets.
//! Unset keys take the experiment's canonical defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::fd::FdBcKind;
use crate::geometry::Metric;
use crate::spectral::SpectralBcKind;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{key}: {message}")]
    Validation { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation { key: key.into(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Experiment {
    FdBackwardFixed,
    FdBackwardAsymptotic,
    FdForward,
    SpectralBackward,
    SpectralAdaptiveBackward,
    SpectralForwardTwoStage,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::FdBackwardFixed,
        Experiment::FdBackwardAsymptotic,
        Experiment::FdForward,
        Experiment::SpectralBackward,
        Experiment::SpectralAdaptiveBackward,
        Experiment::SpectralForwardTwoStage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::FdBackwardFixed => "FdBackwardFixed",
            Experiment::FdBackwardAsymptotic => "FdBackwardAsymptotic",
            Experiment::FdForward => "FdForward",
            Experiment::SpectralBackward => "SpectralBackward",
            Experiment::SpectralAdaptiveBackward => "SpectralAdaptiveBackward",
            Experiment::SpectralForwardTwoStage => "SpectralForwardTwoStage",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Experiment::FdBackwardFixed => "finite differences from t=1 toward 0, boundary held at its initial value",
            Experiment::FdBackwardAsymptotic => "finite differences from t=1 toward 0, two-term asymptotic boundary",
            Experiment::FdForward => "finite differences from the corner datum at t=0",
            Experiment::SpectralBackward => "Chebyshev collocation from t=1 toward 0 at fixed resolution",
            Experiment::SpectralAdaptiveBackward => "Chebyshev collocation toward 0 with node doubling",
            Experiment::SpectralForwardTwoStage => "step datum on a wide domain, then radiation boundary on a narrow one",
        }
    }

    pub fn is_spectral(self) -> bool {
        matches!(
            self,
            Experiment::SpectralBackward | Experiment::SpectralAdaptiveBackward | Experiment::SpectralForwardTwoStage
        )
    }

    pub fn is_forward(self) -> bool {
        matches!(self, Experiment::FdForward | Experiment::SpectralForwardTwoStage)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

/// Narrow-domain continuation of a two-stage forward run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage2Config {
    pub length: f64,
    pub degree: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub metric: Metric,
    pub c0: f64,
    pub length: f64,
    /// Grid spacing (finite-difference experiments).
    pub ds: Option<f64>,
    /// Polynomial degree (spectral experiments).
    pub degree: Option<usize>,
    pub dt: f64,
    pub t_end: f64,
    pub spectral_bc: Option<SpectralBcKind>,
    pub refine_threshold: Option<f64>,
    pub max_degree: usize,
    pub probes: Vec<f64>,
    pub series_every: usize,
    pub spectrum: bool,
    pub window: Option<(f64, f64)>,
    /// Switch time of a two-stage run.
    pub t_switch: Option<f64>,
    pub stage2: Option<Stage2Config>,
    pub out: Option<PathBuf>,
    /// Leave wall time out of the manifest so every output file is reproducible.
    pub deterministic: bool,
}

const KEYS: &[&str] = &[
    "experiment",
    "metric",
    "c0",
    "L",
    "ds",
    "N",
    "dt",
    "t_end",
    "bc",
    "threshold",
    "max_degree",
    "probes",
    "series_every",
    "spectrum",
    "window",
    "t_switch",
    "stage2_L",
    "stage2_N",
    "stage2_dt",
    "out",
    "deterministic",
];

fn canonical_key(key: &str) -> Option<&'static str> {
    let alias = match key {
        "length" | "half_width" => "L",
        "degree" | "nodes" => "N",
        "refine_threshold" => "threshold",
        "output" | "out_dir" => "out",
        other => other,
    };
    KEYS.iter().copied().find(|k| *k == alias)
}

/// Key-value pairs in file order, later assignments winning.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<&'static str, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| ConfigError::Parse { line: i + 1, message: format!("expected `key = value`, got `{body}`") })?;
            let key = key.trim();
            let value = unquote(value.trim());
            if value.is_empty() {
                return Err(ConfigError::Parse { line: i + 1, message: format!("missing value for `{key}`") });
            }
            let canonical =
                canonical_key(key).ok_or_else(|| ConfigError::Parse { line: i + 1, message: format!("unknown key `{key}`") })?;
            if raw.entries.insert(canonical, value.to_string()).is_some() {
                return Err(ConfigError::Parse { line: i + 1, message: format!("duplicate key `{key}`") });
            }
        }
        Ok(raw)
    }

    /// Replace or add one entry.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let canonical = canonical_key(key).ok_or_else(|| invalid(key, "unknown key"))?;
        self.entries.insert(canonical, unquote(value.trim()).to_string());
        Ok(())
    }

    fn get(&self, key: &'static str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, key: &'static str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| invalid(key, format!("cannot parse `{v}`: {e}"))))
            .transpose()
    }

    fn list(&self, key: &'static str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(v) = self.get(key) else { return Ok(None) };
        let inner = v.trim_start_matches('[').trim_end_matches(']');
        inner
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|e| invalid(key, format!("cannot parse `{s}`: {e}"))))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    pub fn into_config(self) -> Result<ExperimentConfig, ConfigError> {
        let experiment: Experiment = self
            .get("experiment")
            .ok_or_else(|| invalid("experiment", "missing"))?
            .parse()
            .map_err(|e: String| invalid("experiment", e))?;
        let mut cfg = ExperimentConfig::defaults(experiment);
        if let Some(m) = self.parsed::<Metric>("metric")? {
            cfg.metric = m;
        }
        if let Some(v) = self.parsed("c0")? {
            cfg.c0 = v;
        }
        if let Some(v) = self.parsed("L")? {
            cfg.length = v;
        }
        if let Some(v) = self.parsed::<f64>("ds")? {
            if experiment.is_spectral() {
                return Err(invalid("ds", "spectral experiments take N"));
            }
            cfg.ds = Some(v);
        }
        if let Some(v) = self.parsed::<usize>("N")? {
            if !experiment.is_spectral() {
                return Err(invalid("N", "finite-difference experiments take ds"));
            }
            cfg.degree = Some(v);
        }
        if let Some(v) = self.parsed("dt")? {
            cfg.dt = v;
        }
        if let Some(v) = self.parsed("t_end")? {
            cfg.t_end = v;
        }
        if let Some(v) = self.get("bc") {
            cfg.spectral_bc = Some(parse_bc(experiment, v)?);
        }
        if let Some(v) = self.parsed("threshold")? {
            if experiment != Experiment::SpectralAdaptiveBackward {
                return Err(invalid("threshold", "only SpectralAdaptiveBackward refines"));
            }
            cfg.refine_threshold = Some(v);
        }
        if let Some(v) = self.parsed("max_degree")? {
            cfg.max_degree = v;
        }
        if let Some(v) = self.list("probes")? {
            cfg.probes = v;
        }
        if let Some(v) = self.parsed("series_every")? {
            cfg.series_every = v;
        }
        if let Some(v) = self.parsed("spectrum")? {
            cfg.spectrum = v;
        }
        if let Some(v) = self.list("window")? {
            let [a, b] = v[..] else { return Err(invalid("window", "expected two values")) };
            cfg.window = Some((a, b));
        }
        if let Some(v) = self.parsed("deterministic")? {
            cfg.deterministic = v;
        }
        if let Some(v) = self.get("out") {
            cfg.out = Some(PathBuf::from(v));
        }
        let stage_keys = ["t_switch", "stage2_L", "stage2_N", "stage2_dt"];
        if experiment != Experiment::SpectralForwardTwoStage {
            if let Some(k) = stage_keys.iter().find(|k| self.get(k).is_some()) {
                return Err(invalid(k, "only SpectralForwardTwoStage has a second stage"));
            }
        } else {
            let s2 = cfg.stage2.as_mut().expect("two-stage defaults");
            if let Some(v) = self.parsed("t_switch")? {
                cfg.t_switch = Some(v);
            }
            if let Some(v) = self.parsed("stage2_L")? {
                s2.length = v;
            }
            if let Some(v) = self.parsed("stage2_N")? {
                s2.degree = v;
            }
            if let Some(v) = self.parsed("stage2_dt")? {
                s2.dt = v;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn unquote(v: &str) -> &str {
    v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v)
}

fn parse_bc(experiment: Experiment, v: &str) -> Result<SpectralBcKind, ConfigError> {
    let wanted = v.to_ascii_lowercase().replace('-', "_");
    let fixed_name = match experiment {
        Experiment::FdBackwardFixed | Experiment::FdForward => Some(FdBcKind::FixedFirstOrder.name()),
        Experiment::FdBackwardAsymptotic => Some(FdBcKind::AsymptoticSecondOrder.name()),
        Experiment::SpectralForwardTwoStage => Some("fixed_then_radiation"),
        _ => None,
    };
    if let Some(name) = fixed_name {
        return Err(invalid("bc", format!("{experiment} always uses `{name}`")));
    }
    [SpectralBcKind::ProjectedSecondOrder, SpectralBcKind::SelfSimilarity, SpectralBcKind::Radiation]
        .into_iter()
        .find(|k| k.name() == wanted)
        .ok_or_else(|| invalid("bc", format!("`{v}` is not one of projected_second_order, self_similarity, radiation")))
}

impl ExperimentConfig {
    /// Canonical parameters of each experiment.
    pub fn defaults(experiment: Experiment) -> Self {
        let base = ExperimentConfig {
            experiment,
            metric: Metric::Euclidean,
            c0: 0.2,
            length: 50.0,
            ds: None,
            degree: None,
            dt: -5e-5,
            t_end: 0.1,
            spectral_bc: None,
            refine_threshold: None,
            max_degree: 16384,
            probes: Vec::new(),
            series_every: 20,
            spectrum: false,
            window: None,
            t_switch: None,
            stage2: None,
            out: None,
            deterministic: true,
        };
        match experiment {
            Experiment::FdBackwardFixed => ExperimentConfig { ds: Some(0.01), probes: vec![0.75, 0.5, 0.25, 0.1], ..base },
            Experiment::FdBackwardAsymptotic => {
                ExperimentConfig { length: 10.0, ds: Some(0.01), probes: vec![0.75, 0.5, 0.25, 0.1], ..base }
            }
            Experiment::FdForward => ExperimentConfig {
                ds: Some(0.01),
                dt: 5e-5,
                t_end: 0.25,
                probes: (1..=10).map(|k| (25 * k) as f64 / 1000.0).collect(),
                ..base
            },
            Experiment::SpectralBackward => ExperimentConfig {
                length: 10.0,
                degree: Some(2048),
                dt: -1e-6,
                t_end: 0.03,
                spectral_bc: Some(SpectralBcKind::ProjectedSecondOrder),
                probes: vec![0.05, 0.04, 0.03],
                series_every: 1000,
                spectrum: true,
                ..base
            },
            Experiment::SpectralAdaptiveBackward => ExperimentConfig {
                length: 10.0,
                degree: Some(1024),
                dt: -2e-6,
                t_end: 2.67e-3,
                spectral_bc: Some(SpectralBcKind::ProjectedSecondOrder),
                refine_threshold: Some(2e-4),
                probes: vec![0.05, 0.04, 0.03, 0.01, 5e-3, 2.67e-3],
                series_every: 1000,
                spectrum: true,
                ..base
            },
            Experiment::SpectralForwardTwoStage => ExperimentConfig {
                degree: Some(16384),
                dt: 1e-5,
                t_end: 1.5,
                probes: vec![0.1, 0.2, 0.3, 0.5, 1.0, 1.5],
                series_every: 1000,
                window: Some((-10.0, 10.0)),
                t_switch: Some(0.3),
                stage2: Some(Stage2Config { length: 10.0, degree: 1024, dt: 1e-5 }),
                ..base
            },
        }
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        RawConfig::parse(text)?.into_config()
    }

    /// Parse, then apply `key = value` overrides before validation.
    pub fn parse_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::parse(text)?;
        for (k, v) in overrides {
            raw.set(k, v)?;
        }
        raw.into_config()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &str, v: f64| if v > 0.0 && v.is_finite() { Ok(()) } else { Err(invalid(key, format!("must be positive, got {v}"))) };
        if !(self.c0 >= 0.0 && self.c0.is_finite()) {
            return Err(invalid("c0", format!("must be non-negative, got {}", self.c0)));
        }
        positive("L", self.length)?;
        positive("t_end", self.t_end)?;
        if self.dt == 0.0 || !self.dt.is_finite() {
            return Err(invalid("dt", "must be non-zero"));
        }
        let forward = self.experiment.is_forward();
        if forward != (self.dt > 0.0) {
            let dir = if forward { "forward" } else { "backward" };
            return Err(invalid("dt", format!("sign of {} does not match a {dir} experiment", self.dt)));
        }
        if !forward && self.t_end >= 1.0 {
            return Err(invalid("t_end", "backward runs start at t = 1 and must end before it"));
        }
        if self.experiment.is_spectral() {
            let n = self.degree.ok_or_else(|| invalid("N", "missing"))?;
            if n < 4 || n % 2 != 0 {
                return Err(invalid("N", format!("must be even and at least 4, got {n}")));
            }
            if n > self.max_degree {
                return Err(invalid("N", format!("exceeds max_degree {}", self.max_degree)));
            }
        } else {
            let ds = self.ds.ok_or_else(|| invalid("ds", "missing"))?;
            positive("ds", ds)?;
            let intervals = 2.0 * self.length / ds;
            if (intervals - intervals.round()).abs() > 1e-6 * intervals || intervals.round() < 2.0 {
                return Err(invalid("ds", format!("2L / ds = {intervals} is not a whole number of intervals")));
            }
        }
        if let Some(th) = self.refine_threshold {
            positive("threshold", th)?;
        }
        if let Some((a, b)) = self.window {
            if !(a < b) {
                return Err(invalid("window", "lower bound must be below the upper one"));
            }
        }
        if self.probes.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(invalid("probes", "probe times must be positive"));
        }
        let monotone = self.probes.windows(2).all(|w| if forward { w[1] > w[0] } else { w[1] < w[0] });
        if !monotone {
            return Err(invalid("probes", "probe times must be strictly monotone in the run direction"));
        }
        if self.experiment == Experiment::SpectralForwardTwoStage {
            let t_switch = self.t_switch.ok_or_else(|| invalid("t_switch", "missing"))?;
            positive("t_switch", t_switch)?;
            if t_switch >= self.t_end {
                return Err(invalid("t_switch", "must come before t_end"));
            }
            let s2 = self.stage2.ok_or_else(|| invalid("stage2_L", "missing"))?;
            positive("stage2_L", s2.length)?;
            if s2.length > self.length {
                return Err(invalid("stage2_L", "stage-2 domain must fit inside stage 1"));
            }
            if s2.dt <= 0.0 {
                return Err(invalid("stage2_dt", "sign does not match a forward experiment"));
            }
            if s2.degree < 4 || s2.degree % 2 != 0 {
                return Err(invalid("stage2_N", "must be even and at least 4"));
            }
        }
        Ok(())
    }

    /// Flat text form accepted by [`ExperimentConfig::parse`].
    pub fn to_text(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(", ");
        let mut lines = vec![
            format!("experiment = {}", self.experiment),
            format!("metric = {}", self.metric.name()),
            format!("c0 = {}", self.c0),
            format!("L = {}", self.length),
        ];
        if let Some(ds) = self.ds {
            lines.push(format!("ds = {ds}"));
        }
        if let Some(n) = self.degree {
            lines.push(format!("N = {n}"));
        }
        lines.push(format!("dt = {:e}", self.dt));
        lines.push(format!("t_end = {:e}", self.t_end));
        if let (Some(bc), false) = (self.spectral_bc, self.experiment == Experiment::SpectralForwardTwoStage) {
            lines.push(format!("bc = {}", bc.name()));
        }
        if let Some(th) = self.refine_threshold {
            lines.push(format!("threshold = {th:e}"));
        }
        lines.push(format!("max_degree = {}", self.max_degree));
        if !self.probes.is_empty() {
            lines.push(format!("probes = {}", list(&self.probes)));
        }
        lines.push(format!("series_every = {}", self.series_every));
        lines.push(format!("spectrum = {}", self.spectrum));
        if let Some((a, b)) = self.window {
            lines.push(format!("window = {a}, {b}"));
        }
        if let Some(t) = self.t_switch {
            lines.push(format!("t_switch = {t}"));
        }
        if let Some(s2) = self.stage2 {
            lines.push(format!("stage2_L = {}", s2.length));
            lines.push(format!("stage2_N = {}", s2.degree));
            lines.push(format!("stage2_dt = {:e}", s2.dt));
        }
        if let Some(out) = &self.out {
            lines.push(format!("out = {}", out.display()));
        }
        lines.push(format!("deterministic = {}", self.deterministic));
        lines.join("\n") + "\n"
    }
}
