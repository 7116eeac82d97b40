//! Maximization of quadratic objectives over the reachable values of
//! convergent affine discrete-time systems.

pub mod benchgen;
pub mod bounds;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod par;
pub mod qpcore;
pub mod seqlab;
pub mod solver;

pub use error::{Error, Result};
pub use nalgebra;
pub use par::Execution;
