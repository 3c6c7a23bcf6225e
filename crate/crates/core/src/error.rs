use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("photon number {n} does not fit below cutoff {dim}")]
    Cutoff { n: usize, dim: usize },

    #[error("truncation at dim {dim} leaves trace deficit {deficit:.3e}; need dim >= {required_dim}")]
    CutoffTail {
        dim: usize,
        deficit: f64,
        required_dim: usize,
    },

    #[error("grid too short for pulse: norm deficit {deficit:.3e}")]
    Truncation { deficit: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("time grids do not match")]
    GridMismatch,

    #[error("envelope not normalized: integral of |h|^2 is {norm}")]
    Unnormalized { norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("pulse cannot be impedance matched: cos^2(theta) = {cos2:.4} > 1 at t = {time}")]
    Unmatchable { time: f64, cos2: f64 },

    #[error("cos(theta) = 1 needs an unbounded Rabi frequency")]
    UnboundedDrive,

    #[error("matrix is not a valid density matrix: {0}")]
    InvalidState(String),

    #[error("step size {dt} exceeds stability bound {bound}")]
    StepSize { dt: f64, bound: f64 },

    #[error("bath recurrence time {recurrence:.3} does not exceed window {window:.3}")]
    Recurrence { recurrence: f64, window: f64 },

    #[error("bath bandwidth {bandwidth} below 20x pulse bandwidth {pulse_bandwidth:.4}")]
    Bandwidth { bandwidth: f64, pulse_bandwidth: f64 },

    #[error("{0}")]
    Parse(String),

    #[error("{}: {source}", path.display())]
    File {
        path: std::path::PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn file(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
        move |source| Error::File {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Physically infeasible requests (as opposed to malformed input).
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::Unmatchable { .. }
                | Error::UnboundedDrive
                | Error::StepSize { .. }
                | Error::Recurrence { .. }
                | Error::Bandwidth { .. }
                | Error::Truncation { .. }
                | Error::CutoffTail { .. }
        )
    }
}
