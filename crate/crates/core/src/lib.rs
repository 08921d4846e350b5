//! Random density matrices under induced, Hilbert-Schmidt, product-Dirichlet
//! and Bures measures, with the analytic densities and moments they follow
//! and the Monte Carlo tooling that checks one against the other.

// `!(x >= 0.0)` rejects NaN along with negatives; kept deliberately.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod ensembles;
pub mod error;
pub mod quadrature;
pub mod qstate;
pub mod rng;
pub mod special;
pub mod stats;
pub mod tolerance;

pub use error::{Error, Result};
pub use qstate::{
    BipartitePureState, ComplexMatrix, DensityMatrix, EigenSystem, PureState, Spectrum, Subsystem,
};
pub use rng::RandomStream;
