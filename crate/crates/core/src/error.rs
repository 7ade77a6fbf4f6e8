use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty mesh")]
    EmptyMesh,
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("mesh schema violation at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("pinched cell unsupported: {0}")]
    PinchedCell(String),
    #[error("degenerate chart: surface factor {0:e} at ({1}, {2})")]
    DegenerateChart(f64, f64, f64),
    #[error("inversion failed: {0}")]
    InversionFailed(String),
    #[error("degenerate cell {0}: {1}")]
    DegenerateCell(usize, String),
    #[error("decomposition failed: {0}")]
    Decomposition(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("problem setup: {0}")]
    Problem(String),
    #[error("solver failure ({cells} cells, {dofs} dofs): {message}")]
    Solver {
        cells: usize,
        dofs: usize,
        message: String,
    },
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
