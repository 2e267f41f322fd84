//! Run configuration merged from three layers of increasing precedence:
//! built-in defaults, a `key = value` config file, and command line flags.
//!
//! The config file format is one `key = value` pair per line; blank lines
//! and lines starting with `#` are ignored. Recognized keys are `beta`,
//! `format`, `samples`, `seed`, `threshold`, `s_cap`, and `output`. When no
//! `--config` flag is given the path is taken from the `CUSPLESS_CONFIG`
//! environment variable if set.

use std::path::{Path, PathBuf};

use crate::CliError;

pub const CONFIG_ENV: &str = "CUSPLESS_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Fully resolved knobs shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub beta: f64,
    pub format: OutputFormat,
    pub samples: usize,
    pub seed: u64,
    /// Convergence bound on the boundary value objective.
    pub threshold: f64,
    /// Arclength horizon standing in for an infinite cuspless range.
    pub s_cap: f64,
    pub output: Option<PathBuf>,
}

/// One layer of overrides; `None` leaves the lower layer's value in place.
#[derive(Debug, Clone, Default)]
pub struct ConfigLayer {
    pub beta: Option<f64>,
    pub format: Option<OutputFormat>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub threshold: Option<f64>,
    pub s_cap: Option<f64>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    /// Defaults, then the file layer, then the flag layer; validates the
    /// result. `s_cap` falls back to `10 / beta` so the horizon scales with
    /// the metric.
    pub fn resolve(file: ConfigLayer, flags: ConfigLayer) -> Result<Self, CliError> {
        let pick = |a: Option<f64>, b: Option<f64>| b.or(a);
        let beta = pick(file.beta, flags.beta).unwrap_or(1.0);
        let cfg = RunConfig {
            beta,
            format: flags.format.or(file.format).unwrap_or(OutputFormat::Csv),
            samples: flags.samples.or(file.samples).unwrap_or(100),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            threshold: pick(file.threshold, flags.threshold).unwrap_or(1e-4),
            s_cap: pick(file.s_cap, flags.s_cap).unwrap_or(10.0 / beta),
            output: flags.output.or(file.output),
        };
        if !(cfg.beta > 0.0) || !cfg.beta.is_finite() {
            return Err(CliError::bad_input("beta must be positive and finite"));
        }
        if cfg.samples < 2 {
            return Err(CliError::bad_input("sample count must be at least 2"));
        }
        if !(cfg.threshold > 0.0) {
            return Err(CliError::bad_input("threshold must be positive"));
        }
        if !(cfg.s_cap > 0.0) || !cfg.s_cap.is_finite() {
            return Err(CliError::bad_input("s_cap must be positive and finite"));
        }
        Ok(cfg)
    }
}

/// Loads the file named by `--config`, or by `CUSPLESS_CONFIG` when the flag
/// is absent, or returns an empty layer when neither is set.
pub fn file_layer(flag: Option<&Path>) -> Result<ConfigLayer, CliError> {
    let path = match flag {
        Some(p) => p.to_path_buf(),
        None => match std::env::var_os(CONFIG_ENV) {
            Some(p) => PathBuf::from(p),
            None => return Ok(ConfigLayer::default()),
        },
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::bad_input(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text).map_err(|msg| CliError::bad_input(format!("config {}: {msg}", path.display())))
}

fn parse(text: &str) -> Result<ConfigLayer, String> {
    let mut layer = ConfigLayer::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |what: &str| format!("line {}: invalid {what} value {value:?}", lineno + 1);
        match key {
            "beta" => layer.beta = Some(value.parse().map_err(|_| bad("beta"))?),
            "format" => {
                layer.format = Some(match value {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    _ => return Err(bad("format")),
                })
            }
            "samples" => layer.samples = Some(value.parse().map_err(|_| bad("samples"))?),
            "seed" => layer.seed = Some(value.parse().map_err(|_| bad("seed"))?),
            "threshold" => layer.threshold = Some(value.parse().map_err(|_| bad("threshold"))?),
            "s_cap" => layer.s_cap = Some(value.parse().map_err(|_| bad("s_cap"))?),
            "output" => layer.output = Some(PathBuf::from(value)),
            _ => return Err(format!("line {}: unknown key {key:?}", lineno + 1)),
        }
    }
    Ok(layer)
}
