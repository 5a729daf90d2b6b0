use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("cyclotomic order mismatch: {0} vs {1}")]
    OrderMismatch(u64, u64),
    #[error("order {from} does not divide target order {to}")]
    BadLift { from: u64, to: u64 },
    #[error("coefficient vector has length {got}, expected phi(N) = {expected}")]
    BadLength { got: usize, expected: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degenerate lattice")]
    DegenerateLattice,
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("m must be at least 1")]
    ZeroOrder,
    #[error("empty point set")]
    EmptyPointSet,
    #[error("zero polynomial has no tropical value")]
    EmptyPolynomial,
    #[error("vector is not in the dual lattice")]
    NotDual,
    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),
    #[error("arithmetic overflow computing {0}")]
    Overflow(&'static str),
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("undefined symbol `{0}`")]
    UndefinedSymbol(String),
    #[error("variable X{index} exceeds rank {rank}")]
    VariableOutOfRange { index: usize, rank: usize },
    #[error("finite field: {0}")]
    Field(String),
    #[error("singular curve: discriminant vanishes")]
    SingularCurve,
    #[error("field too large: {0} elements (limit 1000000)")]
    FieldTooLarge(u64),
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("field does not contain full {0}-torsion")]
    TorsionNotRational(u64),
    #[error("polynomial vanishes identically on the curve")]
    VanishesOnCurve,
    #[error("curve is not supersingular (trace {trace} mod {p} != 0)")]
    NotSupersingular { trace: i64, p: u64 },
    #[error("{0}")]
    Unsupported(String),
    #[error("bound violated: {0}")]
    BoundViolation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
