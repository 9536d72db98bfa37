//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by model construction, propagation and diagnostics.
#[derive(Debug, Error)]
pub enum AdiaError {
    /// An argument violated a precondition (non-finite input, non-unit axis, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The instantaneous spectral gap dropped below the configured floor.
    #[error("degenerate spectrum at t = {t}: |R| = {gap:.3e} is at or below the gap floor {floor:.3e}")]
    DegenerateSpectrum { t: f64, gap: f64, floor: f64 },

    /// Unitarity drift of the propagator exceeded the configured limit.
    #[error("integration diverged at t = {t}: unitarity drift {drift:.3e} exceeds limit {limit:.3e}")]
    IntegrationDiverged { t: f64, drift: f64, limit: f64 },

    /// The requested operation is not defined for this model variant.
    #[error("{operation} is not supported for the {model} model")]
    UnsupportedModel {
        operation: &'static str,
        model: &'static str,
    },

    /// A scenario or model file failed validation. `path` is the field path
    /// (e.g. `model.omega0`) or file location that failed.
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    /// A diagnostic failed for one member of an ensemble.
    #[error("ensemble member {index}: {source}")]
    EnsembleMember {
        index: usize,
        #[source]
        source: Box<AdiaError>,
    },

    /// Filesystem failure, with the offending path attached.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl AdiaError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        AdiaError::InvalidArgument(msg.into())
    }

    pub fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        AdiaError::Config {
            path: path.into(),
            message: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, AdiaError>;
