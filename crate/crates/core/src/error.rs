use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("separation undefined for fewer than two nodes")]
    SeparationUndefined,
    #[error("invalid cluster parameters: {0}")]
    InvalidParams(String),
    #[error("invalid node vector: {0}")]
    InvalidNodes(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("rank-deficient by shape: {rows}x{cols}")]
    RankDeficientByShape { rows: usize, cols: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("singular matrix")]
    Singular,
    #[error("row index {index} out of range for {rows} rows")]
    RowOutOfRange { index: usize, rows: usize },
    #[error("row indices must be strictly increasing")]
    RowsNotIncreasing,
    #[error("coincident nodes at positions {0} and {1}")]
    CoincidentNodes(usize, usize),
    #[error("decimation stride must be positive")]
    ZeroStride,
    #[error("bandwidth Omega={omega} outside (0, {max}]")]
    OmegaOutOfRange { omega: f64, max: f64 },
    #[error("insufficient moments: need {need}, got {got}")]
    InsufficientMoments { need: usize, got: usize },
    #[error("no certificate: decimation not admissible")]
    NoCertificate,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("model order mismatch: numerical rank {rank} for {s} nodes")]
    ModelOrderMismatch { rank: usize, s: usize },
    #[error("pseudoinverse breakdown: smallest singular value {0:e}")]
    PinvBreakdown(f64),
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("degenerate node estimate")]
    DegenerateNodes,
    #[error("size mismatch: truth has {truth} nodes, estimate has {estimate}")]
    SizeMismatch { truth: usize, estimate: usize },
    #[error("node {node} is off grid (nearest grid point {nearest})")]
    OffGrid { node: f64, nearest: f64 },
    #[error("grid too coarse: 2N={two_n} exceeds M={m}")]
    GridTooCoarse { two_n: usize, m: usize },
    #[error("cannot split nodes into two valid configurations: {0}")]
    InvalidSplit(String),
    #[error("inconsistent data/epsilon: no feasible signal")]
    Infeasible,
}

pub type Result<T> = std::result::Result<T, Error>;
