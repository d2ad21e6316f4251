use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate grid: axis {axis} has {count} lattice points (need at least 2)")]
    DegenerateGrid { axis: usize, count: usize },

    #[error("nonpositive weight {value} at vertex {vertex}")]
    NonPositiveWeight { vertex: usize, value: f64 },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("vertex {index} out of range (graph has {len} vertices)")]
    VertexOutOfRange { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A free component has no fixed vertex, so the energy is not coercive.
    #[error("unbounded problem: free component containing vertex {vertex} touches no fixed vertex")]
    Unbounded { vertex: usize },

    #[error("solver did not converge: residual {residual:e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },

    /// The domain has empty boundary, so no positive function can vanish on it.
    #[error("there is no singular function: domain covers the whole graph")]
    NoSingularFunction,

    #[error("domain is not connected around vertex {x0}")]
    DisconnectedDomain { x0: usize },

    #[error("empty sphere at radius {r}")]
    EmptySphere { r: f64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
