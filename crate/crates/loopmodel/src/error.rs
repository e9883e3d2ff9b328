use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("edge index {index} out of range (graph has {count} edges)")]
    EdgeIndex { index: usize, count: usize },

    #[error("vertex index {index} out of range (graph has {count} vertices)")]
    VertexIndex { index: usize, count: usize },

    #[error("invalid neighborhood range: lo={lo} > hi={hi}")]
    NeighborhoodRange { lo: usize, hi: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("direct sampler requires theta = 1 (got {0}); use the Metropolis chain for other theta")]
    ThetaNotOne(f64),

    #[error("resource guard tripped: {0}")]
    Guard(String),

    #[error("domination hypothesis violated at prefix {prefix:?}: cond_x={cond_x} < cond_y={cond_y}")]
    DominationHypothesis {
        prefix: Vec<bool>,
        cond_x: f64,
        cond_y: f64,
    },

    #[error("conditioning event mass {mass} not above truncation bound {truncation}")]
    ConditioningMass { mass: f64, truncation: f64 },

    #[error("radius {radius} unreachable from vertex {vertex} (max reachable distance {max})")]
    RadiusUnreachable {
        vertex: usize,
        radius: usize,
        max: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),
}
