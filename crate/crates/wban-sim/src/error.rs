use thiserror::Error;

/// Errors surfaced by scenario loading, topology construction and the engine.
#[derive(Debug, Error)]
pub enum SimError {
    /// Scenario text could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A configuration value violates an invariant.
    #[error("invalid scenario: field `{field}`: {msg}")]
    Validation { field: &'static str, msg: String },

    /// No placement connecting every sensor to a sink was found within the
    /// retry bound; the range is too small for the node density.
    #[error("no connected topology found after {retries} placement attempts")]
    TopologyUnreachable { retries: u32 },

    /// The thermal step is too coarse for the configured cooling rate
    /// (explicit Euler requires dt <= eta_c / omega).
    #[error("unstable thermal step: dt = {dt} s exceeds eta_c/omega = {limit} s")]
    UnstableStep { dt: f64, limit: f64 },

    /// Report text could not be parsed back into a report.
    #[error("report parse error: {0}")]
    ReportParse(String),
}

pub type Result<T> = std::result::Result<T, SimError>;
