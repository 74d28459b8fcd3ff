//! Exit-code plumbing and report writing.

use std::fs;
use std::path::Path;

use latcomm_core::LatticeError;

/// What a completed command concluded. Domain and I/O failures travel
/// as `CliError` instead and exit 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Everything the command checked held; exit 0.
    Pass,
    /// A mathematical check failed (bad certificate, counterexample);
    /// exit 2.
    MathFail,
}

impl Verdict {
    pub fn all(checks: impl IntoIterator<Item = bool>) -> Self {
        if checks.into_iter().all(|c| c) {
            Verdict::Pass
        } else {
            Verdict::MathFail
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Domain(#[from] LatticeError),
    #[error("{path}: {err}")]
    Io { path: String, err: String },
    #[error("{path}: invalid JSON: {err}")]
    Json { path: String, err: String },
    #[error("{0}")]
    Usage(String),
}

pub fn io_err(path: &Path, err: impl std::fmt::Display) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        err: err.to_string(),
    }
}

/// Pretty JSON plus a trailing newline. Reports carry no wall-clock
/// data, so identical (command, seed, config) runs write identical
/// bytes.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Json {
        path: path.display().to_string(),
        err: e.to_string(),
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}
