//! Causal correlations, the causal polytope and its inequalities, and
//! process-matrix violations of those inequalities.

pub mod catalog;
pub mod correlation;
pub mod error;
pub mod geometry;
pub mod lp;
pub mod membership;
pub mod number;
pub mod process;
pub mod sampling;
pub mod scenario;
pub mod strategy;
pub mod stream;

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use correlation::{AnyCorrelation, Correlation, CorrelationFile, InputConditioning, PostSelection};
pub use error::{Error, Result};
pub use number::{NumberKind, Probability, Rational};
pub use scenario::{PartySpec, Scenario};
pub use strategy::{
    causal_order_for_input, classify_vertex, enumerate_causal_vertices, is_causal_deterministic, CausalWitness,
    DeterministicStrategy, EnumerationOptions, VertexClass, VertexSet,
};
