use std::path::PathBuf;

/// Errors raised across the lab.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value at index {index} ({context})")]
    NonFinite { index: usize, context: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("cutoff lattice has no centers")]
    EmptyLattice,

    #[error("drift is not regularized (mollification level required)")]
    UnregularizedDrift,

    #[error("drift divergence is not available")]
    MissingDivergence,

    #[error("monotonicity/CFL condition violated: {0}")]
    Cfl(String),

    #[error("linear solver did not converge after {iterations} sweeps (update {update:.3e})")]
    SolverDivergence { iterations: usize, update: f64 },

    #[error("no kappa up to {ceiling:.3e} certifies decay of the level-set sequence")]
    KappaNotCertified { ceiling: f64 },

    #[error("time {0} is not on the simulation grid")]
    NotGridTime(f64),

    #[error("exponential moment overflow at path quantile {quantile:.4} (exponent {exponent:.3e})")]
    ExponentOverflow { quantile: f64, exponent: f64 },

    #[error("bad file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        artifacts: Vec<PathBuf>,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
