// Checks are written as `!(x > tol)` so that NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod completion;
pub mod displacement;
pub mod error;
pub mod factorizer;
pub mod fixtures;
pub mod format;
pub mod grid;
pub mod laurent;
pub mod linalg;
pub mod scalar;
pub mod triangular;

pub use completion::{unitary_completion, CompletionInput, SolverKind};
pub use error::{FactorError, Result};
pub use factorizer::{
    canonicalize, convergence_sweep, factorize, Diagnostics, FactorizationConfig, FactorizationResult, Normalization,
    Orders, Side,
};
pub use format::CoefficientFile;
pub use laurent::{det_laurent, residual_metric, LaurentMatrix, LaurentPoly};
pub use scalar::{scalar_spectral_factor, ScalarDensity, ScalarFactorParams};
