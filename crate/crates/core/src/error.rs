use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("need at least {needed} observations, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("empty sample")]
    Empty,

    #[error("degenerate sample: {0}")]
    Degenerate(&'static str),

    #[error("sample value {value} lies below xmin {xmin}")]
    BelowXmin { value: f64, xmin: f64 },

    #[error("fits use different xmin ({first} vs {second})")]
    XminMismatch { first: f64, second: f64 },

    #[error("optimizer did not converge after {iterations} iterations; objective trace {trace:?}")]
    NonConvergence { iterations: usize, trace: Vec<f64> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("duplicate item id `{0}`")]
    DuplicateId(String),

    #[error("item `{0}` has a zero like or dislike count")]
    ZeroCount(String),

    #[error("insufficient spread: no admissible knot candidate")]
    InsufficientSpread,

    #[error("outcome contains a single class")]
    SingleClass,

    #[error("separation: coefficient `{term}` diverged to {value}")]
    Separation { term: String, value: f64 },

    #[error("rank-deficient design: column `{column}` is collinear with {others:?}")]
    RankDeficient { column: String, others: Vec<String> },

    #[error("non-nested models: full log-likelihood {full} is below null {null}")]
    NonNested { full: f64, null: f64 },
}
