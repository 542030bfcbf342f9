//! Normal-coordinate constructions for pseudo-Riemannian metrics.
//!
//! The crate evaluates metrics from a small catalog or from expression
//! tables, computes curvature, builds normal-coordinate charts by geodesic
//! integration, and checks the metric expansion, conformal factors,
//! embeddings and so(p,q) generator algebra against independent oracles.

pub mod algebra;
pub mod conformal;
pub mod convergence;
pub mod curvature;
pub mod diff;
pub mod dual;
pub mod embedding;
pub mod error;
pub mod expansion;
pub mod expr;
pub mod geodesic;
pub mod metric;
pub mod report;
pub mod scenario;
pub mod tensor;

pub use error::{Error, Result};
