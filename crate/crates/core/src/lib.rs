//! Metric measure graphs, epsilon-discretizations and Poincaré inequalities
//! at large scale.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod discretizer;
pub mod error;
pub mod growth;
pub mod mmgraph;
pub mod poincare;
pub mod scalar;
pub mod seed;
pub mod spaces;
pub mod verify;

pub use error::{Error, Result};
pub use mmgraph::VertexId;
pub use scalar::Real;
pub use seed::Seed;

pub type Graph = mmgraph::MMGraph<f64>;
pub type Field = mmgraph::ScalarField<f64>;
pub type Cloud = discretizer::PointCloud<f64>;
