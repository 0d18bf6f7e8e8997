use std::path::PathBuf;

/// Crate-wide error type. The CLI maps variants onto its exit-code contract.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("`{name}` takes exactly one argument (extra argument at byte {offset})")]
    ArityMismatch { name: String, offset: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Evaluation failed inside a subexpression (log of a nonpositive value,
    /// division by zero, overflow, ...).
    #[error("domain error in `{subexpr}` at t = {t}: {message}")]
    Domain {
        subexpr: String,
        t: f64,
        message: &'static str,
    },

    #[error("quadrature did not converge: achieved error {achieved:e} > requested {requested:e}")]
    Convergence { achieved: f64, requested: f64 },

    /// A height or inversion target fell outside the working interval.
    #[error("{quantity} {value} outside [0, {max}]")]
    Range {
        quantity: &'static str,
        value: f64,
        max: f64,
    },

    #[error("full-mode area is not defined over a weighted-cell floor")]
    UnsupportedMode,

    #[error("invalid floor: {0}")]
    InvalidFloor(String),

    #[error("invalid ceiling: {0}")]
    InvalidCeiling(String),

    /// The unbounded-growth verdict failed and no declared limit was supplied,
    /// so no positive lower bound for the isoperimetric profile exists.
    #[error(
        "warping function is not certified unbounded on the working interval \
         and no declared limit was given; no positive lower bound for the profile exists"
    )]
    BoundedWarping,

    #[error("omega must be positive, got {0}")]
    NonPositiveOmega(f64),

    /// The area equation Vol(F)·f(h)^n = A has the same left-hand side for
    /// every h, so it either holds everywhere or nowhere.
    #[error("degenerate area equation: ceiling area does not depend on the height")]
    DegenerateEquation,

    #[error("no height in [0, {domain_max}] attains ceiling area {target}")]
    NoSolution { target: f64, domain_max: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
