//! Run configuration: flags layered over an optional TOML/JSON file.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::nav::{ModelParams, Sampler};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    #[default]
    Jsonl,
}

impl std::str::FromStr for OutputFormat {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "csv" => Ok(Self::Csv),
            "jsonl" => Ok(Self::Jsonl),
            other => Err(ConfigError(format!("unknown format `{other}` (expected csv or jsonl)"))),
        }
    }
}

/// Every key a config file may set. Flags use the same names.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub lambda: Option<f64>,
    pub theta: Option<f64>,
    pub theta_frac: Option<String>,
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub segments: Option<usize>,
    pub steps: Option<usize>,
    pub t: Option<f64>,
    pub sampler: Option<Sampler>,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl ConfigLayer {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
        }
    }

    /// Keys set in `self` win over `base`.
    pub fn over(self, base: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            lambda: self.lambda.or(base.lambda),
            // an explicit angle in either form overrides both forms below it
            theta: self.theta.or(if self.theta_frac.is_some() { None } else { base.theta }),
            theta_frac: self.theta_frac.or(if self.theta.is_some() { None } else { base.theta_frac }),
            seed: self.seed.or(base.seed),
            paths: self.paths.or(base.paths),
            segments: self.segments.or(base.segments),
            steps: self.steps.or(base.steps),
            t: self.t.or(base.t),
            sampler: self.sampler.or(base.sampler),
            format: self.format.or(base.format),
            out: self.out.or(base.out),
            threads: self.threads.or(base.threads),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub lambda: f64,
    pub theta: f64,
    pub seed: u64,
    pub paths: usize,
    pub segments: usize,
    pub steps: usize,
    pub t: Option<f64>,
    pub sampler: Sampler,
    pub format: OutputFormat,
    pub out: PathBuf,
    pub threads: usize,
}

pub const DEFAULT_LAMBDA: f64 = 1.0;
pub const DEFAULT_THETA: f64 = std::f64::consts::FRAC_PI_4;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_PATHS: usize = 100;
pub const DEFAULT_SEGMENTS: usize = 100_000;
pub const DEFAULT_STEPS: usize = 100;

/// `"p/q"` as `π·p/q`.
pub fn parse_theta_frac(s: &str) -> Result<f64, ConfigError> {
    let err = || ConfigError(format!("theta-frac `{s}` must look like p/q with positive integers"));
    let (p, q) = s.split_once('/').ok_or_else(err)?;
    let p: u32 = p.trim().parse().map_err(|_| err())?;
    let q: u32 = q.trim().parse().map_err(|_| err())?;
    if q == 0 {
        return Err(err());
    }
    Ok(std::f64::consts::PI * p as f64 / q as f64)
}

impl RunConfig {
    /// Resolve a layer against defaults and validate ranges. `env_threads`
    /// is the value of `NAV_THREADS`, which overrides everything else.
    pub fn resolve(layer: ConfigLayer, env_threads: Option<&str>) -> Result<Self, ConfigError> {
        let theta = match (&layer.theta, &layer.theta_frac) {
            (Some(_), Some(_)) => {
                return Err(ConfigError("give theta or theta-frac, not both".into()));
            }
            (Some(t), None) => *t,
            (None, Some(f)) => parse_theta_frac(f)?,
            (None, None) => DEFAULT_THETA,
        };
        let lambda = layer.lambda.unwrap_or(DEFAULT_LAMBDA);
        if (theta - FRAC_PI_2).abs() < 1e-12 {
            return Err(ConfigError(
                "theta = π/2 is excluded: the model requires 0 < theta < π/2 (the cone must stay strictly narrower than a half-plane)".into(),
            ));
        }
        ModelParams::new(lambda, theta).map_err(|e| ConfigError(e.to_string()))?;
        let mut threads = layer.threads.unwrap_or_else(default_threads);
        if let Some(v) = env_threads {
            threads = v
                .trim()
                .parse()
                .map_err(|_| ConfigError(format!("NAV_THREADS=`{v}` is not a positive integer")))?;
        }
        if threads == 0 {
            return Err(ConfigError("threads must be ≥ 1".into()));
        }
        let cfg = RunConfig {
            lambda,
            theta,
            seed: layer.seed.unwrap_or(DEFAULT_SEED),
            paths: layer.paths.unwrap_or(DEFAULT_PATHS),
            segments: layer.segments.unwrap_or(DEFAULT_SEGMENTS),
            steps: layer.steps.unwrap_or(DEFAULT_STEPS),
            t: layer.t,
            sampler: layer.sampler.unwrap_or_default(),
            format: layer.format.unwrap_or_default(),
            out: layer.out.unwrap_or_else(|| PathBuf::from(".")),
            threads,
        };
        if cfg.paths == 0 {
            return Err(ConfigError("paths must be ≥ 1".into()));
        }
        if cfg.steps == 0 {
            return Err(ConfigError("steps must be ≥ 1".into()));
        }
        if let Some(t) = cfg.t {
            if !(t > 0.0 && t.is_finite()) {
                return Err(ConfigError(format!("t must be a positive number, got {t}")));
            }
        }
        Ok(cfg)
    }

    pub fn params(&self) -> ModelParams {
        ModelParams::new(self.lambda, self.theta).expect("validated in resolve")
    }
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
