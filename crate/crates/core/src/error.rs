use thiserror::Error;

/// Errors raised by the laboratory.
///
/// Variants fall into three families that the CLI maps onto distinct exit
/// codes: invalid input (`Invalid*`, `OutOfRange`, `EmptyGrid`,
/// `MeasureZero`), numerical failure (`IllConditioned`, `Unbounded`,
/// `NonConvergence`, `DimensionCap`) and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("index {index} out of range for explicit sequence of length {len}")]
    OutOfRange { index: usize, len: usize },

    #[error("interval [{0}, {1}] has left endpoint above right endpoint")]
    ReversedInterval(f64, f64),

    #[error("set has Lebesgue measure zero")]
    MeasureZero,

    #[error("grid is empty")]
    EmptyGrid,

    #[error("basis is numerically degenerate on the grid (column {column}, relative pivot {pivot:.3e})")]
    IllConditioned { column: usize, pivot: f64 },

    #[error("linear program is unbounded: the constraint grid does not pin down the space")]
    Unbounded,

    #[error("solver did not converge within {0} exchanges")]
    NonConvergence(usize),

    #[error("dimension {dimension} exceeds cap {cap}")]
    DimensionCap { dimension: usize, cap: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::IllConditioned { .. }
                | Error::Unbounded
                | Error::NonConvergence(_)
                | Error::DimensionCap { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
