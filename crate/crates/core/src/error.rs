use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("node index {index} outside the valid range {lo}..={hi}")]
    Index { index: usize, lo: usize, hi: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular: {0}")]
    Singular(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("position {x} outside tabulated range [{lo}, {hi}]")]
    Range { x: f64, lo: f64, hi: f64 },

    #[error("monotonicity lost at node {node} (layer {layer}): x[{node}+1] - x[{node}] = {gap:e}")]
    Monotonicity { layer: usize, node: usize, gap: f64 },

    #[error("step {step} did not converge in {iters} iterations (last relative change {change:e})")]
    NonConvergence { step: usize, iters: usize, change: f64 },

    #[error("run stopped at t = {t}: {source} (last good layers written to {})", dump.display())]
    RunFailed {
        t: f64,
        dump: std::path::PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidMesh(_) | Error::Range { .. } => 2,
            Error::Io(_) => 2,
            Error::RunFailed { .. } => 3,
            _ => 3,
        }
    }
}
