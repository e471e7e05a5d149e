//! Verification toolkit for multiobjective interval-valued optimization.

pub mod certificates;
pub mod cli;
pub mod error;
pub mod evp;
pub mod expr;
pub mod game;
pub mod grid;
pub mod interval;
pub mod io;
pub mod ivf;
pub mod polytope;
pub mod problem;
pub mod report;

pub use error::{Error, Result};
pub use interval::Interval;
