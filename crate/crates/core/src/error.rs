use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("operands belong to different fields")]
    MixedFields,
    #[error("operands are over different variable universes")]
    MixedUniverses,
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not a prime below 2^31")]
    NotPrime(u64),
    #[error("degree {d} is out of range for {n} variables")]
    BadDegree { n: usize, d: usize },
    #[error("input too large: {0}")]
    TooLarge(String),
    #[error("matrix is not square")]
    NotSquare,
    #[error("assignment does not cover variable x{0}")]
    IncompleteAssignment(usize),
    #[error("field too small: {0}")]
    FieldTooSmall(String),
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(usize),
    #[error("number of dropped rows and columns differ")]
    AsymmetricDrop,
    #[error("matrix is not read-once")]
    NotReadOnce,
    #[error("a variable occupies more than {0} cells")]
    ReadBoundViolated(usize),
    #[error("determinant is identically zero")]
    ZeroDeterminant,
    #[error("determinant self-check failed: {0}")]
    SelfCheckFailed(String),
    #[error("variable x{0} labels more than one edge")]
    NotOccurrenceOne(usize),
    #[error("malformed branching program: {0}")]
    MalformedAbp(String),
    #[error("no read-once construction for degree {d} with {n} variables")]
    UnsupportedDegree { n: usize, d: usize },
    #[error("retry budget of {0} exhausted")]
    RetryBudgetExhausted(usize),
    #[error("field does not admit the witness: {0}")]
    FieldNotAdmitting(String),
    #[error("search target too large: {0}")]
    TargetTooLarge(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
