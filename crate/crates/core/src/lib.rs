//! Stochastic model-based methods for weakly convex objectives over
//! proximally smooth sets.
//!
//! The crate covers the sets and their projections, the four model families,
//! inner set approximations with retractions, the constrained subproblem
//! solvers, the plain and retracted drivers with their step schedules, and
//! Moreau-envelope stationarity diagnostics. `problems` ships the reference
//! instances and `experiment` wires a problem, model and schedule together.

pub mod approximations;
pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod models;
pub mod problems;
pub mod rng;
pub mod subsolver;
pub mod vector;

pub use error::{Error, Result};
pub use vector::Vector;

/// The guide's code samples, compiled and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sets.md")]
    mod sets {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/subproblem.md")]
    mod subproblem {}
    #[doc = include_str!("../../../book/src/approximations.md")]
    mod approximations {}
    #[doc = include_str!("../../../book/src/algorithms.md")]
    mod algorithms {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/problems.md")]
    mod problems {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    mod reproducibility {}
}
