use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by a series that vanishes up to its truncation")]
    DivisionByZeroSeries,
    #[error("result has no known coefficients")]
    EmptyTruncation,
    #[error("coefficient at exponent {requested}/{scale} requested, but the series is only known below {trunc}/{scale}")]
    BeyondTruncation { requested: i64, trunc: i64, scale: u32 },
    #[error("scale mismatch: {0} does not divide {1}")]
    ScaleMismatch(u32, u32),
    #[error("unsupported weight {0} for Eisenstein series (need even k >= 4)")]
    UnsupportedWeight(i64),
    #[error("leading coefficient after removing the monomial part is not 1")]
    NonUnitLeadingTerm,
    #[error("monomial power is not representable in the series scale")]
    FractionalMonomialPower,
    #[error("exp needs a series with positive valuation")]
    ExpNeedsPositiveValuation,

    #[error("form [{0},{1},{2}] is not positive definite")]
    NotPositiveDefinite(i64, i64, i64),
    #[error("{0} is not a discriminant (need d > 0 and -d = 0 or 1 mod 4)")]
    BadDiscriminant(i64),
    #[error("beta = {beta} does not satisfy beta^2 = -{d} mod {modulus}")]
    BadBeta { d: i64, beta: i64, modulus: i64 },
    #[error("forms have different discriminants")]
    DiscriminantMismatch,
    #[error("form [{0},{1},{2}] is not a Gamma0({3}) form")]
    NotGamma0Form(i64, i64, i64, i64),
    #[error("no coprime represented value found for the genus character")]
    NoCoprimeValue,

    #[error("prime {0} is not supported here")]
    UnsupportedPrime(i64),
    #[error("need {needed} terms, have {available}")]
    InsufficientTruncation { needed: i64, available: i64 },
    #[error("point is not in the upper half plane")]
    NotUpperHalfPlane,
    #[error("series evaluation did not converge within {0} terms")]
    ConvergenceFailure(i64),

    #[error("linear system has no solution: {0}")]
    SingularSystem(String),
    #[error("plus-space support violated at exponent {0}")]
    PlusSupportViolation(i64),

    #[error("D = {0} is not admissible for index {1}")]
    BadD(i64, i64),
    #[error("discriminant {0} has no cell inside the stored window")]
    WindowMiss(i64),
    #[error("cells with discriminant {0} carry different coefficients")]
    InconsistentDiscriminantDependence(i64),
    #[error("l = {0} is not coprime to p = {1}")]
    BadL(i64, i64),

    #[error("d = {0} is not admissible for p = {1}")]
    NotAdmissible(i64, i64),
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("D = {0} and -d = -{1} are not coprime")]
    NotCoprime(i64, i64),
    #[error("value {value} is not within tolerance of an integer (residual {residual})")]
    RecognitionFailure { value: String, residual: String },

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
