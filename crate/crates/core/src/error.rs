use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid problem specification: {0}")]
    InvalidSpec(String),

    #[error("singular pivot at row {0}")]
    SingularPivot(usize),

    #[error("no convergence after {iterations} iterations: {reason}")]
    NoConvergence { iterations: usize, reason: String },

    #[error("eigenvalue bounds inconsistent: lower {lower} >= upper {upper}")]
    InconsistentBounds { lower: f64, upper: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("concentration scale {scale:e} is below the resolvable scale {resolvable:e}")]
    Unresolved { scale: f64, resolvable: f64 },

    #[error("barrier violated: {0}")]
    BarrierViolated(String),

    #[error("mountain-pass level collapse: path maximum {level} does not exceed endpoint floor {floor}")]
    LevelCollapse { level: f64, floor: f64 },

    #[error("invalid mountain-pass endpoints: {0}")]
    Endpoints(String),

    #[error("exterior problem outside the ball-solver range: {0}")]
    ExteriorRegime(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
