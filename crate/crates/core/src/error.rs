use thiserror::Error;

/// Errors raised by the library.
///
/// Hypothesis violations found by the sampling verifiers are *not* errors;
/// they are reported as data in [`crate::model::HypothesisReport`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("box is degenerate: {0}")]
    DegenerateBox(String),
    #[error("exponent value {value} at node {node} is not greater than 1")]
    AnyValueAtMostOne { node: usize, value: f64 },
    #[error("non-finite value encountered at node {node}")]
    NonFinite { node: usize },
    #[error("mesh mismatch: expected {expected} entries, found {found}")]
    MeshMismatch { expected: usize, found: usize },
    #[error("could not bracket the Luxemburg norm (modular {modular:e})")]
    BracketFailure { modular: f64 },
    #[error("boundary value {value:e} at node {node} exceeds the zero-trace tolerance")]
    NonzeroBoundary { node: usize, value: f64 },
    #[error("both arguments are zero")]
    BothZero,
    #[error("invalid exponent expression `{expr}`: {reason}")]
    Expression { expr: String, reason: String },
    #[error("no radius with a positive sampled energy floor was found")]
    NoMountainRidge,
    #[error("energy along the ray stays nonnegative up to t = {t_max:e}")]
    NoValley { t_max: f64 },
    #[error("path maximum {peak} fell below the ridge level {rho}")]
    DegenerateCollapse { peak: f64, rho: f64 },
    #[error("ladder size {requested} exceeds the {available} interior nodes")]
    LadderTooLarge { requested: usize, available: usize },
    #[error("the reaction must be odd in t")]
    OddnessRequired,
    #[error("hypothesis {0} is violated on sample")]
    HypothesisViolated(String),
    #[error("reaction energy {value:e} is below the admissible floor")]
    ZeroDenominator { value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
