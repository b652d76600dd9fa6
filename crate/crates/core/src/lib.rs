//! Full-field acoustic simulation with finite-aperture sources and analytic oracles.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod delta;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod harness;
pub mod io;
pub mod oracle;
pub mod signal;
pub mod solver;
pub mod source;
pub mod spectral;

pub use error::{Result, WaveError};
pub use grid::{make_grid, max_supported_frequency, pml_update_factor, Field, Grid, PmlConfig};
pub use solver::{Medium, PressureRecord, Sensor, Solver, SolverConfig, SolverState};
pub use spectral::{spectral_derivative, SpectralOps, Stagger, WavenumberField};
