use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Lorentz dimension must be at least 3, got {0}")]
    DimensionTooSmall(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("gram matrix is not symmetric (defect {0:e})")]
    NotSymmetric(f64),

    #[error("signature check failed: gram has signature ({plus},{minus}), expected ({want_plus},{want_minus})")]
    Signature {
        plus: usize,
        minus: usize,
        want_plus: usize,
        want_minus: usize,
    },

    #[error("vector is not null: |q(v)| = {0:e}")]
    NotNull(f64),

    #[error("zero vector does not span a line")]
    ZeroVector,

    #[error("incidence value {0:e} lies in the ambiguity band")]
    Ambiguous(f64),

    #[error("lines are not opposite (|B(e,m)| = {0:e})")]
    NotOpposite(f64),

    #[error("matrix does not preserve the form (defect {0:e})")]
    NotOrthogonal(f64),

    #[error("element does not fix the line L (chordal drift {0:e})")]
    DoesNotFixL(f64),

    #[error("parameter must be positive, got {0}")]
    NonPositive(f64),

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("boost axis endpoints must be non-parallel null vectors")]
    BadAxis,

    #[error("a Schottky group needs at least two generators, got {0}")]
    TooFewGenerators(usize),

    #[error("expected {expected} ping-pong balls, got {got}")]
    BallCount { expected: usize, got: usize },

    #[error("ping-pong failure at generator {generator} ({detail}): margin {margin:e}")]
    PingPong {
        generator: usize,
        detail: String,
        margin: f64,
    },

    #[error("group carries no ping-pong certificate")]
    Uncertified,

    #[error("element is not regular (top eigenvalue ratio {0})")]
    NotRegular(f64),

    #[error("dominant eigenline is not isotropic: |q(rep)| = {0:e}")]
    NotIsotropic(f64),

    #[error("limit sample is empty")]
    EmptySample,

    #[error("point is not on the quadric Q_L (|B(e, rep)| = {0:e})")]
    NotInQuadric(f64),

    #[error("limit point coincides with L")]
    PointIsL,

    #[error("domain search failed: best margin {best_margin:e} at {best_point:?}")]
    SearchFailed {
        best_margin: f64,
        best_point: Vec<f64>,
        densest_direction: Vec<f64>,
    },
}
