use thiserror::Error;

/// Errors raised by the numerical kernels, the channel model and the harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is numerically singular (condition estimate {cond:.3e})")]
    SingularMatrix { cond: f64 },

    #[error("Woodbury auxiliary matrix is numerically singular (condition estimate {cond:.3e})")]
    SingularAuxiliary { cond: f64 },

    #[error("dimension mismatch in {op}: expected {expected}, got {got}")]
    DimensionMismatch {
        op: &'static str,
        expected: String,
        got: String,
    },

    #[error("unsupported array geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("UT {ut} at t = {t_s} s is at elevation {elevation_deg:.2} deg, below the {mask_deg} deg mask")]
    BelowMinElevation {
        ut: usize,
        t_s: f64,
        elevation_deg: f64,
        mask_deg: f64,
    },

    #[error("precoder has zero Frobenius norm")]
    ZeroPrecoder,

    #[error("empty input")]
    EmptyInput,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_mismatch(
    op: &'static str,
    expected: impl Into<String>,
    got: impl Into<String>,
) -> Error {
    Error::DimensionMismatch {
        op,
        expected: expected.into(),
        got: got.into(),
    }
}
