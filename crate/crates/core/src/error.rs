use thiserror::Error;

use crate::C2;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("function is not inner: {0}")]
    NotInner(String),

    #[error("denominator vanishes inside the open bidisc near ({:.6}, {:.6})", .witness[0], .witness[1])]
    ZeroInOpenBidisc { witness: C2 },

    #[error("|p(z)| = {modulus:.3e} is too small to evaluate directly")]
    NearSingularity { modulus: f64 },

    #[error("Newton iteration did not converge from ({0:.4}, {1:.4})")]
    NoConvergence(f64, f64),

    #[error("radial limit is unstable: successive extrapolants differ by {0:.3e}")]
    NoStableLimit(f64),

    #[error("point lies within {0:.1e} of a singularity of the symbol")]
    SingularAtPoint(f64),

    #[error("gap form is negative ({value:.3e}) at a sampled point; p~/p is not inner")]
    DivergentRatio { value: f64, at: C2 },

    #[error("no sample landed in a region that is known to be nonempty")]
    EmptyRegion,

    #[error("non-positive volume at delta = {0:?}")]
    NonPositiveVolume(Vec<f64>),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange { name: &'static str, value: f64, range: &'static str },

    #[error("another torus zero lies within {0:.3} of the base point")]
    NotIsolatedZero(f64),

    #[error("power-law fit is unreliable (r^2 = {0:.4})")]
    BadFit(f64),

    #[error("Gram matrix Hermiticity residual {0:.3e} exceeds tolerance")]
    QuadratureUnstable(f64),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
