//! Simulation and verification toolkit for quantum bit commitment schemes
//! built on state and channel distinguishability problems.

pub mod channels;
pub mod error;
pub mod linalg;
pub mod norms;
pub mod oraclegame;
pub mod schemes;

pub use error::{Error, Result};
