use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("not divisible; remainder {remainder}")]
    NotDivisible { remainder: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("elements carry different case tags")]
    CaseMismatch,
    #[error("element is not rational: coordinate {coord} is {value}")]
    NotRational { coord: String, value: String },
    #[error("rational value has a denominator: {value}")]
    NotIntegral { value: String },
    #[error("element is not primitive (two conjugates coincide)")]
    NotPrimitive,
    #[error("|D(alpha)| / |D_K| = {quotient} is not a perfect square")]
    NonSquareQuotient { quotient: String },
    #[error("index mismatch at m = {m}, x = {coords:?}: direct {direct}, symbolic {symbolic}")]
    Mismatch { m: i64, coords: Vec<i64>, direct: String, symbolic: String },
    #[error("m = {0} is not square-free with m = 2, 3 (mod 4)")]
    InadmissibleParameter(i64),
    #[error("sieve inconclusive: {0}")]
    Inconclusive(String),
    #[error("certificate rejected: {0}")]
    CertificateRejected(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
