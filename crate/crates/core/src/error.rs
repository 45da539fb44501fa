use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("eigendecomposition did not converge: {0}")]
    EigenNonConvergence(String),

    #[error("map is not completely positive: Choi eigenvalue {eigenvalue:.3e} below -{tol:.1e}")]
    NotCompletelyPositive { eigenvalue: f64, tol: f64 },

    #[error("input state {index} is not physical: minimum eigenvalue {min_eigenvalue:.3e}")]
    NonPhysicalState { index: usize, min_eigenvalue: f64 },

    #[error("tomography input matrix is ill-conditioned (condition number {condition:.3e} > {limit:.1e})")]
    IllConditioned { condition: f64, limit: f64 },

    #[error("degenerate unperturbed spectrum: eigenphase gap {gap:.3e} <= {tol:.1e}")]
    DegenerateSpectrum { gap: f64, tol: f64 },

    #[error("eigenvalue pairing failed: {0}")]
    Pairing(String),

    #[error("profile error: {0}")]
    Profile(String),

    #[error("inverse transform error: {0}")]
    Transform(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
