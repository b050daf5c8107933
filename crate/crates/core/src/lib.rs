//! Exact and certified simulation of the quantum procedure that recovers the
//! period lattice of an infrastructure.

pub mod check;
pub mod error;
pub mod generation;
pub mod infra;
pub mod lattice;
pub mod planner;
pub mod linalg;
pub mod pipeline;
pub mod rational;
pub mod real;
pub mod recovery;
pub mod sampler;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use lattice::Lattice;
pub use rational::{q, qi, JsonQ, Q, Z};
