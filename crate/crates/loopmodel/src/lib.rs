//! Simulator and verification toolkit for the random loop model on finite
//! graphs.
//!
//! The model lives on a finite simple graph. A state is an ordered sequence
//! of links, each link being an edge together with a sign (`+1` a cross,
//! `-1` a double bar). Links induce a decomposition of the vertex set into
//! loops; configurations are weighted by `beta^n / n!` times sign factors
//! and `theta^(number of loops)`.
//!
//! The crate provides:
//! * graph construction and line-graph neighborhoods ([`graph`]),
//! * the configuration space and its weights ([`config`]),
//! * the loop decomposition algorithm ([`loops`]),
//! * blocking-edge indicators ([`blocking`]),
//! * exact (`theta = 1`) and Metropolis samplers ([`sampler`]),
//! * cluster analysis and reach estimators ([`percolation`]),
//! * the closed-form domination bound `delta(beta, u, theta)`, the
//!   monotone coupling construction and an exhaustive verifier for the
//!   domination inequality ([`domination`]),
//! * ground-truth engines: exhaustive enumeration and an independent
//!   trajectory-tracing loop builder ([`oracle`]).

pub mod blocking;
pub mod config;
pub mod domination;
pub mod error;
pub mod graph;
pub mod loops;
pub mod oracle;
pub mod percolation;
pub mod sampler;

pub use blocking::EdgeIndicators;
pub use config::{LinkConfig, Params, Sign};
pub use error::ModelError;
pub use graph::{EdgeNeighborhood, Graph};
pub use loops::LoopDecomposition;

/// Crate version, embedded in CLI output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
