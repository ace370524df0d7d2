use thiserror::Error;

use crate::symkernel::Expr;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),

    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),

    #[error("pole at {location}")]
    Pole { location: String },

    #[error("inconclusive sampling: no admissible point in {attempts} attempts")]
    Inconclusive { attempts: usize },

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integration diverged after t = {last_good_t}")]
    Divergence { last_good_t: f64 },

    #[error("generator signatures differ: {0}")]
    SignatureMismatch(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("gauge constraint violated for {tag}; residual {residual}")]
    Constraint { tag: String, residual: Expr },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("reduction failed; residual {residual}")]
    ReductionFailure { residual: Expr },

    #[error("ladder terminated: bracket annihilates the current solution")]
    LadderTerminated,

    #[error("ratio is not constant: {0}")]
    NonConstantRatio(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
