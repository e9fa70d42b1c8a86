use num_complex::Complex64;
use thiserror::Error;

/// Errors surfaced by the reduction and norm-computation pipeline.
#[derive(Debug, Error)]
pub enum MorError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("shift hits spectrum: pencil is singular at alpha = {shift}")]
    ShiftOnSpectrum { shift: Complex64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("Lyapunov equation singular (eigenvalue pair sums to zero)")]
    LyapunovSingular,

    #[error("spectrum collision: shift {shift} matches a pencil eigenvalue")]
    SpectrumCollision { shift: Complex64 },

    #[error("eigensolver failed to converge after {iterations} iterations")]
    EigNoConvergence { iterations: i32 },

    #[error("numerical rank {rank} below requested {wanted} in {context}")]
    RankDeficient {
        rank: usize,
        wanted: usize,
        context: String,
    },

    #[error(
        "matrix dimension {n} exceeds dense limit {limit}; use the quadrature fallback \
         or raise MORKIT_DENSE_LIMIT"
    )]
    Oversize { n: usize, limit: usize },

    #[error("system is unstable (spectral abscissa {abscissa:e}); H2 norm undefined")]
    Unstable { abscissa: f64 },

    #[error("IRKA iteration {iteration} failed: {reason}")]
    IrkaBreakdown { iteration: usize, reason: String },

    #[error("inconsistent Gramians: {0}")]
    InconsistentGramians(String),

    #[error("quadrature grid too narrow: integrand tail {tail:e} exceeds 1e-12 of peak")]
    GridTooNarrow { tail: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("residual {residual:e} exceeds tolerance {tol:e} in {context}")]
    ResidualTooLarge {
        residual: f64,
        tol: f64,
        context: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
