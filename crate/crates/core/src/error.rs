use thiserror::Error;

/// Errors raised by the arithmetic, local and descent routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero has no factorization, valuation or square class")]
    Zero,
    #[error("{0} is not an odd prime")]
    NotOddPrime(u128),
    #[error("{0} is not prime")]
    NotPrime(u128),
    #[error("{0} is not squarefree")]
    NotSquarefree(u64),
    #[error("singular curve y^2 = x^3 + {a}x^2 + {b}x")]
    Singular { a: i64, b: i64 },
    #[error("magnitude out of range: {0}")]
    Overflow(String),
    #[error("p = 2 is not handled by {0}")]
    EvenPrime(&'static str),
    #[error("reduction at {p} is not multiplicative for ({a}, {b})")]
    NotMultiplicative { a: i64, b: i64, p: u64 },
    #[error("model is not minimal at {p}")]
    NonMinimal { p: u64 },
    #[error("local solubility search at {p} exhausted precision {precision} without a decision")]
    PrecisionExhausted { p: u64, precision: u32 },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
