use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A matrix has the wrong shape for the slot it was given.
    Dimension {
        field: String,
        expected: (usize, usize),
        found: (usize, usize),
    },
    /// A scalar or entry is outside its admissible range.
    InvalidValue { field: String, reason: String },
    IndexOutOfRange { index: usize, bound: usize },
    VertexCap { positive: usize, cap: usize },
    /// `[T; C_bar]` is rank deficient, so `L1 T + F C_bar = I` has no solution.
    UioUnsolvable { rank: usize, needed: usize },
    Singular(String),
    Asymmetric { residual: f64 },
    NonFinite(String),
    Diverged { step: usize, time: f64 },
    UnknownName(String),
    EmptyWindow,
    NoFeasiblePair,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension { field, expected, found } => write!(
                f,
                "dimension mismatch in `{field}`: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::InvalidValue { field, reason } => write!(f, "invalid `{field}`: {reason}"),
            Error::IndexOutOfRange { index, bound } => {
                write!(f, "index {index} out of range 1..={bound}")
            }
            Error::VertexCap { positive, cap } => write!(
                f,
                "{positive} positive bounds give 2^{positive} vertices, above the cap 2^{cap}"
            ),
            Error::UioUnsolvable { rank, needed } => write!(
                f,
                "UIO condition L1 T + F C_bar = I unsolvable: rank [T; C_bar] = {rank} < {needed}"
            ),
            Error::Singular(what) => write!(f, "{what} is singular"),
            Error::Asymmetric { residual } => {
                write!(f, "constraint expression not symmetric (relative residual {residual:e})")
            }
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::Diverged { step, time } => {
                write!(f, "integration diverged at step {step} (t = {time})")
            }
            Error::UnknownName(name) => write!(f, "unknown name `{name}`"),
            Error::EmptyWindow => write!(f, "window contains no samples"),
            Error::NoFeasiblePair => write!(f, "no feasible scalar pair in the grid"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub(crate) fn check_shape(
    field: &str,
    m: &nalgebra::DMatrix<f64>,
    rows: usize,
    cols: usize,
) -> Result<()> {
    if m.nrows() != rows || m.ncols() != cols {
        return Err(Error::Dimension {
            field: field.into(),
            expected: (rows, cols),
            found: (m.nrows(), m.ncols()),
        });
    }
    Ok(())
}
