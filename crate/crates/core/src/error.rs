use num_bigint::BigInt;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("singular model: discriminant is zero")]
    SingularModel,

    #[error("bad reduction at p = {p}")]
    BadReduction { p: u64 },

    #[error("could not pin a unique group order at p = {p}")]
    AmbiguousOrder { p: u64 },

    #[error("point count {n_points} at p = {p} violates the Hasse bound")]
    HasseViolation { p: u64, n_points: u64 },

    #[error("unknown point-counting strategy `{0}`")]
    UnknownStrategy(String),

    #[error("invalid field size q = {0} (need q >= 2)")]
    InvalidFieldSize(BigInt),

    #[error("rank index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("beta_{index} = {value} is not positive (q = {q}, a1 = {a1})")]
    NonPositiveBeta {
        index: usize,
        value: String,
        q: BigInt,
        a1: BigInt,
    },

    #[error("pole of the zeta function at T = {0}")]
    Pole(String),

    #[error("{0}")]
    Domain(String),

    #[error("curve has complex multiplication (j = {0})")]
    ComplexMultiplication(String),

    #[error("family is empty after filtering")]
    EmptyFamily,

    #[error("series grids differ")]
    GridMismatch,

    #[error("no samples")]
    EmptySample,

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for rejections of well-formed input on mathematical grounds
    /// (CM curve, bad reduction, empty family, invalid field size, ...), as
    /// opposed to I/O and parse failures.
    pub fn is_domain_rejection(&self) -> bool {
        !matches!(
            self,
            Error::Parse { .. } | Error::Schema(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_)
        )
    }
}
