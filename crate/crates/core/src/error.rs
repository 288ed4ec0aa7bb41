use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("shift out of range: |x| = {x} exceeds half extent {half_extent}")]
    ShiftOutOfRange { x: f64, half_extent: f64 },
    #[error("point {value} is not on the {axis} grid")]
    OffGrid { axis: &'static str, value: f64 },
    #[error("window has zero norm")]
    ZeroWindow,
    #[error("adjoint requires the full lattice; inversion is not guaranteed on a partial lattice")]
    PartialLattice,
    #[error("degenerate window pair: |<gamma, g1>| = {0:e}")]
    DegenerateWindowPair(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("symbol box too small: window mass {mass:e} at the box boundary")]
    BoxTooSmall { mass: f64 },
    #[error("insufficient shells: {populated} populated, {required} required")]
    InsufficientShells { populated: usize, required: usize },
    #[error("undefined fit: all shell maxima are zero")]
    UndefinedFit,
    #[error("empty cone/shell intersection in shell {shell}")]
    EmptyConeShell { shell: i32 },
    #[error("unreliable truncation: {0}")]
    UnreliableTruncation(String),
    #[error("singular flow map at direction ({0}, {1})")]
    SingularMap(f64, f64),
    #[error("bin count mismatch: {0} vs {1}")]
    BinMismatch(usize, usize),
    #[error("flow blow-up: non-finite state at t = {0}")]
    FlowBlowup(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
