//! Exact-arithmetic engine for permutation pattern statistics.
//!
//! The crate counts occurrences of classical, vincular and bivincular
//! patterns, aggregates pattern statistics over the symmetric group, and
//! expresses aggregates and higher moments as rational linear combinations
//! of shifted factorials `Σ αᵢ (n+i)!`. Everything is exact: integers are
//! arbitrary precision and every coefficient is a reduced rational.
//!
//! Positions and values are 1-indexed at every public interface.

pub mod aggregate;
pub mod closedform;
pub mod clt;
pub mod factorial_basis;
mod linalg;
pub mod merge;
pub mod numbers;
pub mod pattern;
pub mod perm;
pub mod poly;
pub mod reproduce;
pub mod statistic;
pub mod univariate;

use thiserror::Error;

pub use aggregate::{AggregateResult, BruteConfig, Method};
pub use factorial_basis::{FactorialCombination, OffsetWindow, PolyTimesShiftedFactorial};
pub use merge::{Merge, MergeCensus};
pub use numbers::{Integer, Rational};
pub use pattern::{Occurrence, Pattern};
pub use perm::{Permutation, PositionMap};
pub use poly::ValuationPoly;
pub use statistic::{SimpleStatistic, Statistic};

/// Environment variable overriding the brute-force enumeration cap.
pub const MAX_N_ENV: &str = "PERMOMENT_MAX_N";

/// Default cap on `n` for anything that enumerates all of `S_n`.
pub const DEFAULT_MAX_N: usize = 11;

/// Default cap on the total number of letters `r·k` in a merge enumeration.
pub const DEFAULT_MAX_MERGE_LETTERS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("duplicate entry {0} in sequence")]
    DuplicateEntry(i64),
    #[error("n = {n} exceeds the enumeration cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("index {index} out of range for S_{n}")]
    IndexOutOfRange { n: usize, index: u64 },
    #[error("pattern syntax error at byte {pos}: {msg}")]
    PatternSyntax { pos: usize, msg: String },
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("invalid occurrence tuple: {0}")]
    InvalidTuple(String),
    #[error("polynomial syntax error at byte {pos}: {msg}")]
    PolySyntax { pos: usize, msg: String },
    #[error("unknown variable y{index}: pattern length is {k}")]
    UnknownVariable { index: usize, k: usize },
    #[error("statistic spec{}: {msg}", term.map(|t| format!(", term {t}")).unwrap_or_default())]
    StatisticSpec { term: Option<usize>, msg: String },
    #[error("rational syntax error: {0:?}")]
    RationalSyntax(String),
    #[error("formula syntax error: {0}")]
    FormulaSyntax(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("singular linear system")]
    SingularSystem,
    #[error("fit verification failed at n = {n}: data {expected}, fitted {fitted}")]
    VerificationFailed {
        n: i64,
        expected: String,
        fitted: String,
    },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("n = {n} is below the validity threshold {valid_from}")]
    BelowValidity { n: i64, valid_from: i64 },
    #[error("merge enumeration needs {letters} letters, cap is {cap}")]
    MergeCapExceeded { letters: usize, cap: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Enumeration caps shared by the brute-force and merge paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_n: usize,
    pub max_merge_letters: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_n: DEFAULT_MAX_N,
            max_merge_letters: DEFAULT_MAX_MERGE_LETTERS,
        }
    }
}

impl Limits {
    /// Defaults, with `max_n` taken from `PERMOMENT_MAX_N` when it is set.
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Some(n) = std::env::var(MAX_N_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
        {
            limits.max_n = n;
        }
        limits
    }
}
