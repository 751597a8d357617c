use thiserror::Error;

/// Errors produced by the group algebra, calculus, barrier catalog and solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    Dimension(String),

    #[error("structure matrix B^({index}) is not skew-symmetric (max |B + B^T| = {deviation:e})")]
    NotSkew { index: usize, deviation: f64 },

    #[error("structure matrices are linearly dependent (smallest normalized Gram eigenvalue {0:e})")]
    LinearlyDependent(f64),

    #[error("group is not Heisenberg-like: {0}")]
    NotHeisenbergLike(String),

    #[error("dilation factor must be positive, got {0}")]
    NonPositiveDilation(f64),

    #[error("expression cannot be evaluated: {0}")]
    Domain(String),

    #[error("singular point: {0}")]
    Singular(String),

    #[error("point outside the validity region: {0}")]
    OutsideRegion(String),

    #[error("parameters do not lead to extinction: {0}")]
    NoExtinction(String),

    #[error("stencil needs a node at least one cell from the boundary, got {0:?}")]
    BoundaryNode(Vec<usize>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("initial front touches the boundary of the box: {0}")]
    FrontOnBoundary(String),

    #[error("numerical instability at t = {time}: {detail}")]
    Instability { time: f64, detail: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
