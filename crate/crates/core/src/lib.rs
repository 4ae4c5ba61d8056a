//! Hybrid Euler / ES-BGK / Boltzmann solver for rarefied gas flows on a 2D spatial
//! grid with 3D velocities. Each cell is evolved by one of three layers, picked every
//! step from moment-realizability indicators.

pub mod boltzmann;
pub mod coupling;
pub mod cweno;
pub mod error;
pub mod esbgk;
pub mod euler;
pub mod fftnd;
pub mod harness;
pub mod imex;
pub mod indicators;
pub mod mesh;
pub mod moments;
pub mod regime;
pub mod transport;

pub use error::{Result, SolverError};
