use crate::numkit::NumError;
use crate::projgeom::GeomError;

/// Errors raised by the geometric constructions above the numeric layer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("point is not on the hypersurface (residual {0:e})")]
    NotOnHypersurface(f64),
    #[error("point is singular on the hypersurface")]
    SingularPoint,
    #[error("point lies in the indeterminacy locus: {0}")]
    Indeterminate(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("no candidate passed the filter: {0}")]
    NoCandidate(String),
    #[error("fixture line {line}: {message}")]
    Fixture { line: usize, message: String },
    #[error("tolerance {name} = {value} outside the supported range")]
    Tolerance { name: String, value: f64 },
    #[error("check failed: {0}")]
    CheckFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
