//! Exact discrete exterior calculus on product spacetimes `Time × Σ`.
//!
//! The crate computes cohomology with free, compact, spacelike compact and
//! timelike compact supports, certifies the slice homotopies and duality
//! pairings, builds exact retarded and advanced Green operators for the
//! Laplace–de Rham operator, and checks the observable/solution pairings of
//! the k-form Maxwell models.

pub mod cochain;
pub mod cohomology;
pub mod config;
pub mod duality;
pub mod error;
pub mod homotopy;
pub mod linalg;
pub mod lorentz;
pub mod maxwell;
pub mod mesh;
pub mod outcome;
pub mod report;
pub mod scalar;
pub mod suites;

pub use error::Error;
