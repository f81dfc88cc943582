//! Numerical and exact kernels: scalars, dense linear algebra, polynomials,
//! elimination and univariate root finding.

pub mod elim;
pub mod linalg;
pub mod poly;
pub mod roots;
pub mod scalar;

pub use elim::{common_factor, resultant, CommonFactor};
pub use linalg::{rank_report, solve_linear, Mat, RankReport, SolutionSpace};
pub use poly::{BinaryForm, MultiPoly, UniPoly};
pub use roots::{univariate_roots, Root, RootOptions};
pub use scalar::{int, rat, CFloat, Precision, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("term {exponent:?} does not have degree {expected}")]
    NotHomogeneous { expected: u32, exponent: Vec<u32> },
    #[error("matrix is singular")]
    Singular,
    #[error("polynomial degree is too low")]
    DegreeTooLow,
    #[error("non-finite coefficient")]
    NonFinite,
    #[error("no convergence after {iterations} iterations: {diagnostic}")]
    NonConvergence { iterations: usize, diagnostic: String },
    #[error("no coordinate chart avoided the special locus")]
    NoGenericChart,
}
