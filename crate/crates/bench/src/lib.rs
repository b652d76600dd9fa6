//! Shared fixtures for the kernel benchmarks.

use ndarray::Array3;
use wavekit::{make_grid, Field, Grid, PmlConfig};

pub const C: f64 = 1540.0;
pub const DX: f64 = 1e-3;

pub fn cube(n: usize) -> Grid {
    let hi = (n - 1) as f64 * DX;
    make_grid(&[0.0; 3], &[hi; 3], &[DX; 3], PmlConfig::scaled(C, &[DX; 3])).expect("grid")
}

/// Deterministic, non-trivial field contents.
pub fn smooth_field(grid: &Grid) -> Field {
    let s = grid.shape();
    Array3::from_shape_fn((s[0], s[1], s[2]), |(i, j, k)| {
        ((i as f64 * 0.31).sin() + (j as f64 * 0.17).cos()) * (k as f64 * 0.07).sin()
    })
}
