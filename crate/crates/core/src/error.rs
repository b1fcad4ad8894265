use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("distribution has no support")]
    EmptyDistribution,

    #[error("distribution has zero mean, size-biasing is undefined")]
    ZeroMean,

    #[error("household-size law puts no mass on sizes >= 2, there are no household edges")]
    NoEdges,

    #[error("invalid probability mass function: {0}")]
    InvalidPmf(String),

    #[error("cannot parse distribution `{input}`: {reason}")]
    DistParse { input: String, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no ordered triplets exist, clustering is undefined")]
    DegenerateNetwork,

    #[error("degree variance over edge endpoints is zero, degree correlation is undefined")]
    ZeroVariance,

    #[error("network has no ordered triplets")]
    NoTriplets,

    #[error("operation requires a constant infectious period")]
    ConstantPeriodRequired,

    #[error("{what} did not converge after {iterations} iterations (last estimates: {history:?})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        history: Vec<f64>,
    },

    #[error("target correlation {target} is not attainable at this clustering; attainable interval is [{lo}, {hi}]")]
    Infeasible { target: f64, lo: f64, hi: f64 },

    #[error("invalid tuning target: {0}")]
    InvalidTarget(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown figure `{0}` (expected one of fig1, fig2, fig3, fig4, fig5)")]
    UnknownFigure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
