use thiserror::Error;

use crate::expr::{EvalError, ParseError};

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("{context}: {source}")]
    Parse {
        context: String,
        #[source]
        source: ParseError,
    },

    #[error("{context}: {source}")]
    Eval {
        context: String,
        #[source]
        source: EvalError,
    },

    #[error("degenerate metric at {point:?} (smallest |eigenvalue| {smallest:e})")]
    DegenerateMetric { point: Vec<f64>, smallest: f64 },

    #[error("asymmetric metric at {point:?} (residual {residual:e})")]
    AsymmetricInput { point: Vec<f64>, residual: f64 },

    #[error("frame construction failed at {point:?}: {reason}")]
    FrameConstructionFailure { point: Vec<f64>, reason: String },

    #[error("structure fields (phi, xi, eta) are not bound")]
    StructureNotBound,

    #[error("h is only defined on contact structures (|dη − Φ| = {residual:e})")]
    ContactViolation { residual: f64 },

    #[error("inadmissible probe: {0}")]
    InadmissibleProbe(String),

    #[error("point {point:?} lies outside the domain box")]
    OutsideDomain { point: Vec<f64> },

    #[error("spec file: {0}")]
    Spec(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),

    #[error("catalog entry `{name}` failed its self-test: {detail}")]
    ConstructionSelfTestFailed { name: String, detail: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
