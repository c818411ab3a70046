//! Algebraic P3P solver: camera pose from three bearing/point correspondences
//! through one quartic polynomial, plus the synthetic evaluation harness used
//! to measure its accuracy, stability and speed.

// Guards are written as `!(x >= bound)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod p3p;
pub mod quartic;

pub use error::{Error, Result};
pub use geometry::{P3pProblem, Pose, Solution, Vec3};
pub use p3p::{solve, SolverConfig};
