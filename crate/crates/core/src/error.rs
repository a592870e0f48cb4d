use thiserror::Error;

pub type Result<T> = std::result::Result<T, FactorError>;

#[derive(Debug, Error)]
pub enum FactorError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),

    #[error("density is not hermitian on the unit circle (max defect {0:.3e})")]
    NotHermitian(f64),

    #[error("grid size {0} is not a power of two")]
    GridSize(usize),

    #[error("power window [{lo}, {hi}] does not fit a grid of {size} points")]
    WindowTooLarge { lo: i64, hi: i64, size: usize },

    #[error("density samples are not real (max imaginary part {0:.3e})")]
    NonReal(f64),

    #[error("density is negative beyond tolerance (min sample {0:.3e})")]
    Negative(f64),

    #[error("density vanishes identically")]
    ZeroDensity,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular anchor coefficient for {0} normalization")]
    SingularAnchor(&'static str),

    #[error("numerical breakdown: {0}")]
    Breakdown(String),
}

impl FactorError {
    /// True for violations of an operation's preconditions, as opposed to
    /// failures that occur during the computation itself.
    pub fn is_precondition(&self) -> bool {
        !matches!(self, FactorError::Breakdown(_) | FactorError::SingularAnchor(_))
    }

    /// Short stable tag for machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            FactorError::Dimension(_) => "dimension",
            FactorError::NotSquare(..) => "not-square",
            FactorError::NotHermitian(_) => "not-hermitian",
            FactorError::GridSize(_) => "grid-size",
            FactorError::WindowTooLarge { .. } => "window-too-large",
            FactorError::NonReal(_) => "non-real",
            FactorError::Negative(_) => "negative",
            FactorError::ZeroDensity => "zero-density",
            FactorError::InvalidInput(_) => "invalid-input",
            FactorError::SingularAnchor(_) => "singular-anchor",
            FactorError::Breakdown(_) => "breakdown",
        }
    }
}
