//! Crate-wide error type.
//!
//! Two broad classes matter to callers: configuration problems (bad
//! dimensions, unknown scheme names, malformed experiment files) and numeric
//! failures (rank-deficient channel draws, non-convergent factorizations).
//! The CLI maps the former to exit code 2 and the latter to exit code 3; the
//! Monte-Carlo driver reacts to [`Error::RankDeficient`] by resampling the
//! offending channel draw.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A matrix had a shape that the requested operation cannot accept.
    #[error("{op}: matrix shape {rows}x{cols} is not valid here")]
    BadShape {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    /// A matrix entry was NaN or infinite.
    #[error("non-finite entry at ({row},{col})")]
    NonFinite { row: usize, col: usize },

    /// The factored matrix is (numerically) row-rank deficient. `ratio` is
    /// the smallest-to-largest magnitude ratio along the triangular diagonal.
    #[error("rank-deficient matrix (diagonal ratio {ratio:.3e})")]
    RankDeficient { ratio: f64 },

    /// The Jacobi SVD did not reach the off-diagonal threshold.
    #[error("SVD did not converge after {sweeps} sweeps")]
    SvdDidNotConverge { sweeps: usize },

    /// A linear solve hit a zero (or non-positive-definite) pivot.
    #[error("singular or indefinite system in linear solve")]
    SingularSystem,

    /// A combiner weight vector of all zeros was supplied.
    #[error("combiner weight vector is zero")]
    ZeroCombiner,

    /// The common-stream channel vector vanished, so the combiner that
    /// should align with it is undefined.
    #[error("common channel vector is zero; combiner is undefined")]
    DegenerateCommonChannel,

    /// Stream-level reordering patterns require every user to have the same
    /// number of receive antennas.
    #[error("multi-branch ordering requires equal antenna counts per user")]
    UnequalUserAntennas,

    /// The requested operation needs a lattice, which the Gaussian input
    /// model does not define.
    #[error("operation requires a finite modulation alphabet")]
    UnsupportedModulation,

    /// A scheme identifier could not be parsed.
    #[error("unknown scheme id `{0}`")]
    UnknownScheme(String),

    /// Invalid experiment or system configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Failure reading or writing experiment files.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by numerical degeneracy rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. }
                | Error::RankDeficient { .. }
                | Error::SvdDidNotConverge { .. }
                | Error::SingularSystem
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
