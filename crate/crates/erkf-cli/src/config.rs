//! Flat key=value run configuration.
//!
//! One assignment per line, `#` comments and blank lines allowed. Scalar
//! keys: `T` (sample period, s), `tau_g`, `tau_a`, `gravity`, `n_scale`.
//! Matrix keys take either one number (uniform diagonal) or a
//! comma-separated diagonal of the exact length: `Q_a` (6), `R_a` (3),
//! `Q_p` (6), `R_p` (3), `pi0_a` (6), `pi0_p` (9). Unknown keys are
//! errors; omitted keys keep their defaults.

use std::path::Path;

use erkf::linalg::Mat;
use erkf::models::ModelConfig;

/// Errors raised while loading a configuration file.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    /// The file could not be read.
    #[error("config: {0}")]
    Io(#[from] std::io::Error),
    /// A line failed to parse.
    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// The assembled configuration violates a model precondition.
    #[error("config: {0}")]
    Invalid(String),
}

fn parse_scalar(value: &str, line: usize) -> Result<f64, ConfigError> {
    let v: f64 = value.parse().map_err(|_| ConfigError::Parse {
        line,
        msg: format!("expected a number, got {value:?}"),
    })?;
    if !v.is_finite() {
        return Err(ConfigError::Parse {
            line,
            msg: format!("value {value:?} is not finite"),
        });
    }
    Ok(v)
}

/// A diagonal matrix from one value (uniform) or exactly `dim` values.
fn parse_diag(value: &str, dim: usize, line: usize) -> Result<Mat, ConfigError> {
    let entries: Vec<f64> = value
        .split(',')
        .map(|f| parse_scalar(f.trim(), line))
        .collect::<Result<_, _>>()?;
    match entries.len() {
        1 => Ok(Mat::from_diag(&vec![entries[0]; dim])),
        n if n == dim => Ok(Mat::from_diag(&entries)),
        n => Err(ConfigError::Parse {
            line,
            msg: format!("expected 1 or {dim} diagonal entries, got {n}"),
        }),
    }
}

/// Parse configuration text over the defaults and validate the result.
pub fn parse_config(text: &str) -> Result<ModelConfig, ConfigError> {
    let mut cfg = ModelConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = raw.trim();
        if stripped.is_empty() || stripped.starts_with('#') {
            continue;
        }
        let (key, value) = stripped.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            msg: format!("expected key=value, got {stripped:?}"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "T" => cfg.dt = parse_scalar(value, line)?,
            "tau_g" => cfg.tau_g = parse_scalar(value, line)?,
            "tau_a" => cfg.tau_a = parse_scalar(value, line)?,
            "gravity" => cfg.gravity = parse_scalar(value, line)?,
            "n_scale" => cfg.n_scale = parse_scalar(value, line)?,
            "Q_a" => cfg.q_a = parse_diag(value, 6, line)?,
            "R_a" => cfg.r_a = parse_diag(value, 3, line)?,
            "Q_p" => cfg.q_p = parse_diag(value, 6, line)?,
            "R_p" => cfg.r_p = parse_diag(value, 3, line)?,
            "pi0_a" => cfg.pi0_a = parse_diag(value, 6, line)?,
            "pi0_p" => cfg.pi0_p = parse_diag(value, 9, line)?,
            other => {
                return Err(ConfigError::Parse {
                    line,
                    msg: format!("unknown key {other:?}"),
                })
            }
        }
    }
    cfg.validate().map_err(ConfigError::Invalid)?;
    Ok(cfg)
}

/// Load and parse a configuration file.
pub fn load_config(path: &Path) -> Result<ModelConfig, ConfigError> {
    parse_config(&std::fs::read_to_string(path)?)
}
