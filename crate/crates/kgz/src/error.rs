use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Two fields or states built over structurally different grids were
    /// combined; every binary operation requires matching (n, length).
    #[error("grid mismatch: ({n_a}, {length_a}) vs ({n_b}, {length_b})")]
    GridMismatch {
        n_a: usize,
        length_a: f64,
        n_b: usize,
        length_b: f64,
    },

    /// Soliton parameters outside the admissible cone. The message names the
    /// violated inequality with its numeric value.
    #[error("inadmissible soliton parameters: {0}")]
    Inadmissible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Non-finite values appeared during time stepping.
    #[error("evolution blew up (non-finite field values) near t = {t}")]
    BlowUp { t: f64 },

    /// An observer asked for the run to stop before reaching the target time.
    #[error("evolution aborted by observer at t = {t}")]
    Aborted { t: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    /// Newton iteration for the modulation parameters did not reach the
    /// residual tolerance.
    #[error(
        "modulation fit did not converge in {max_iter} iterations \
         (last residual {residual:.3e}, jacobian condition {cond:.3e})"
    )]
    NoConvergence {
        max_iter: usize,
        residual: f64,
        cond: f64,
    },
}
