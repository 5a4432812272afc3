use thiserror::Error;

use crate::Point;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular spinor: Φ²+Θ² = {norm:e} is below the polar threshold")]
    SingularSpinor { norm: f64 },

    #[error("singular spinor at point {point:?}: Φ²+Θ² = {norm:e}")]
    SingularAt { point: [f64; 4], norm: f64 },

    #[error("constraint violation: {0}")]
    ConstraintViolation(String),

    #[error("invalid polar data: {0}")]
    InvalidPolarData(String),

    #[error("no real positive-energy solution of the dispersion relation: {0}")]
    NoRealRoot(String),

    #[error("degenerate nullspace (nullity {nullity}) with ambiguous branch selection")]
    DegenerateNullspace { nullity: usize },

    #[error("fields in a superposition must share one background")]
    MixedBackgrounds,

    #[error("chiral angle jumps by {jump:.3} rad across the finite-difference stencil")]
    BranchJump { jump: f64 },

    #[error("connection extraction is ill-conditioned: singular value ratio {ratio:e}")]
    IllConditioned { ratio: f64 },

    #[error("implication system is singular: {0}")]
    SingularSystem(String),

    #[error("state is not in the unitary gauge (deviation {deviation:e})")]
    NotGauged { deviation: f64 },

    #[error("equation set {0} does not cover all eight canonical scalars")]
    NotACover(String),

    #[error("unknown equation set `{0}`")]
    UnknownSet(String),

    #[error("unsupported background: {0}")]
    UnsupportedBackground(String),

    #[error("scenario error: {0}")]
    Config(String),
}

impl Error {
    /// Attach the sample point to a pointwise singular-spinor failure.
    pub fn at(self, x: &Point) -> Self {
        match self {
            Error::SingularSpinor { norm } => Error::SingularAt {
                point: [x[0], x[1], x[2], x[3]],
                norm,
            },
            other => other,
        }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::Config(_) | Error::UnknownSet(_))
    }
}
