//! Spectral matrix-nearness solvers for graph partitioning.
//!
//! Given a connected weighted graph `W`, the crate looks for the smallest
//! Frobenius-norm perturbation `εE` (unit `E` on the edge pattern, `W + εE ≥ 0`)
//! that makes the Laplacian's second eigenvalue vanish, optionally under
//! membership or cardinality constraints, or that makes the second and third
//! eigenvalues coalesce.
//!
//! The work is split in two levels. [`flow::run_inner`] minimizes a spectral
//! functional over `E` at fixed `ε`; [`outer::newton_bisection`] searches for
//! the smallest `ε` at which that minimum reaches zero.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`). The aliases below
//! fix the scalar to `f64`.

pub mod error;
pub mod flow;
pub mod graph;
pub mod objective;
pub mod outer;
mod real;
pub mod reference;
pub mod spectral;

pub use error::{Error, Result};
pub use real::Real;

pub type Graph = graph::WeightedGraph<f64>;
pub type Pattern = graph::PatternMatrix<f64>;
pub type Functional = objective::FunctionalKind<f64>;

pub type Report = outer::DistanceReport<f64>;
pub type Partition = reference::Partition<f64>;
