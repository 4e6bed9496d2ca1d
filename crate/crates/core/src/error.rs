use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected n = {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("variable index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("exhaustive enumeration over {vars} variables exceeds the oracle cap of {cap} (cost 2^{vars})")]
    OracleCapExceeded { vars: usize, cap: usize },

    #[error("polynomial has complex coefficients where real ones are required")]
    ComplexCoefficients,

    #[error("moments require a zero constant term (found {re} + {im}i); strip it first")]
    NonzeroConstantTerm { re: f64, im: f64 },

    #[error("intermediate power f^{power} reached {terms} terms, above the limit of {limit}")]
    TermLimitExceeded { power: usize, terms: usize, limit: usize },

    #[error("internal cost guard violated: f^{power} has {terms} terms, combinatorial limit is {limit}")]
    CostGuardViolated { power: usize, terms: usize, limit: u128 },

    #[error("|lambda| = {lambda_abs} lies outside the working disk (zero-free radius {zero_free}, working radius {working})")]
    OutsideDisk { lambda_abs: f64, zero_free: f64, working: f64 },

    #[error("epsilon = {eps} is not above e^-{n} = {floor}; evaluate the partition function directly by enumeration")]
    EpsilonTooSmall { eps: f64, n: usize, floor: f64 },

    #[error("error bounds are only claimed for n >= 2 variables (got {0})")]
    TooFewVariables(usize),

    #[error("step with {free} free variables cannot meet its accuracy budget {budget} and is beyond the oracle cap")]
    UncertifiableStep { free: usize, budget: f64 },

    #[error("coefficient of {support} is {value}, expected +1 or -1")]
    NotSignCoefficient { support: String, value: String },

    #[error("coefficient of {support} is negative ({value})")]
    NegativeCoefficient { support: String, value: f64 },

    #[error("lemma hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("trace does not belong to this polynomial: {0}")]
    TraceMismatch(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
