//! Numerical laboratory for stochastic domination and weak concentration of
//! sums of independent symmetric random vectors in R^d.

pub mod config;
pub mod distributions;
pub mod dominance;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod inequalities;
pub mod majorisation;
pub mod rng;
pub mod runner;
pub mod stats;
pub mod tails;
pub mod report;
pub mod weakborell;

pub use error::{Error, Result};
