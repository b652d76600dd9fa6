//! Regular Cartesian grids and their PML profiles.

use ndarray::{Array1, Array3};

use crate::error::{Result, WaveError};

/// Real field sampled on a grid. Two-dimensional grids use a trailing axis of length 1.
pub type Field = Array3<f64>;

/// Per-axis polynomial absorbing layer.
#[derive(Clone, Debug, PartialEq)]
pub struct PmlConfig {
    /// Layer thickness in grid cells (same on every face).
    pub thickness: usize,
    /// Peak absorption at the outer face, Np/s, per axis.
    pub alpha_max: [f64; 3],
    /// Exponent of the ramp from the interior edge to the outer face.
    pub profile_order: f64,
}

impl PmlConfig {
    pub const DEFAULT_THICKNESS: usize = 10;
    pub const DEFAULT_ORDER: f64 = 4.0;
    /// Peak absorption expressed as Np per cell transit: alpha_max = coeff * c / dx.
    pub const DEFAULT_NP_PER_CELL: f64 = 2.0;

    pub fn none() -> Self {
        PmlConfig {
            thickness: 0,
            alpha_max: [0.0; 3],
            profile_order: Self::DEFAULT_ORDER,
        }
    }

    /// Default layer scaled to the medium: ten cells, fourth-order ramp, alpha_max = 2 c/dx.
    pub fn scaled(c_ref: f64, spacing: &[f64]) -> Self {
        Self::scaled_with(Self::DEFAULT_THICKNESS, Self::DEFAULT_NP_PER_CELL, c_ref, spacing)
    }

    pub fn scaled_with(thickness: usize, np_per_cell: f64, c_ref: f64, spacing: &[f64]) -> Self {
        let mut alpha_max = [0.0; 3];
        for (a, dx) in alpha_max.iter_mut().zip(spacing) {
            *a = np_per_cell * c_ref / dx;
        }
        PmlConfig {
            thickness,
            alpha_max,
            profile_order: Self::DEFAULT_ORDER,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Grid {
    dim: usize,
    n: [usize; 3],
    spacing: [f64; 3],
    min: [f64; 3],
    max: [f64; 3],
    pml: PmlConfig,
    // absorption per axis at nodes and at the +1/2 staggered faces
    alpha: [Vec<f64>; 3],
    alpha_staggered: [Vec<f64>; 3],
}

/// Builds a grid from its extents. The slices give one entry per axis; their length sets the dimension.
pub fn make_grid(extents_min: &[f64], extents_max: &[f64], spacing: &[f64], pml: PmlConfig) -> Result<Grid> {
    let dim = extents_min.len();
    if !(2..=3).contains(&dim) {
        return Err(WaveError::UnsupportedDimension(dim));
    }
    if extents_max.len() != dim || spacing.len() != dim {
        return Err(WaveError::ShapeMismatch {
            expected: vec![dim; 3],
            found: vec![extents_min.len(), extents_max.len(), spacing.len()],
        });
    }
    let mut n = [1usize; 3];
    let mut dx = [1.0; 3];
    let mut lo = [0.0; 3];
    let mut hi = [0.0; 3];
    for axis in 0..dim {
        let h = spacing[axis];
        if !(h > 0.0) || !h.is_finite() {
            return Err(WaveError::NonPositiveSpacing { axis, spacing: h });
        }
        let cells = (extents_max[axis] - extents_min[axis]) / h;
        let rounded = cells.round();
        if !(cells.is_finite()) || (cells - rounded).abs() > 1e-9 * rounded.abs().max(1.0) {
            return Err(WaveError::NonIntegralPointCount { axis, cells });
        }
        let count = rounded as i64 + 1;
        if count < 8 {
            return Err(WaveError::TooFewPoints {
                axis,
                n: count.max(0) as usize,
            });
        }
        n[axis] = count as usize;
        dx[axis] = h;
        lo[axis] = extents_min[axis];
        hi[axis] = extents_max[axis];
    }
    for axis in 0..dim {
        if pml.alpha_max[axis] < 0.0 {
            return Err(WaveError::Config(format!("negative PML absorption on axis {axis}")));
        }
        if 2 * pml.thickness >= n[axis] {
            return Err(WaveError::Config(format!(
                "PML of {} cells leaves no interior on axis {axis} ({} points)",
                pml.thickness, n[axis]
            )));
        }
    }
    let mut alpha: [Vec<f64>; 3] = Default::default();
    let mut alpha_staggered: [Vec<f64>; 3] = Default::default();
    for axis in 0..3 {
        if axis < dim {
            alpha[axis] = pml_profile(n[axis], &pml, axis, 0.0);
            alpha_staggered[axis] = pml_profile(n[axis], &pml, axis, 0.5);
        } else {
            alpha[axis] = vec![0.0];
            alpha_staggered[axis] = vec![0.0];
        }
    }
    Ok(Grid {
        dim,
        n,
        spacing: dx,
        min: lo,
        max: hi,
        pml,
        alpha,
        alpha_staggered,
    })
}

fn pml_profile(n: usize, pml: &PmlConfig, axis: usize, shift: f64) -> Vec<f64> {
    let t = pml.thickness as f64;
    if pml.thickness == 0 {
        return vec![0.0; n];
    }
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| {
            let x = i as f64 + shift;
            // depth into the layer, 0 at the interior edge and 1 at the outer face
            let left = (t - x) / t;
            let right = (x - (last - t)) / t;
            let depth = left.max(right).clamp(0.0, 1.0);
            pml.alpha_max[axis] * depth.powf(pml.profile_order)
        })
        .collect()
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Array shape (trailing 1 for 2D grids).
    pub fn shape(&self) -> [usize; 3] {
        self.n
    }

    pub fn n(&self, axis: usize) -> usize {
        self.n[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.spacing[axis]
    }

    pub fn spacings(&self) -> &[f64] {
        &self.spacing[..self.dim]
    }

    pub fn extents_min(&self) -> &[f64] {
        &self.min[..self.dim]
    }

    pub fn extents_max(&self) -> &[f64] {
        &self.max[..self.dim]
    }

    pub fn pml(&self) -> &PmlConfig {
        &self.pml
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Product of the spacings over the active axes.
    pub fn cell_volume(&self) -> f64 {
        self.spacings().iter().product()
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        if axis >= self.dim {
            return 0.0;
        }
        self.min[axis] + i as f64 * self.spacing[axis]
    }

    pub fn position(&self, idx: [usize; 3]) -> [f64; 3] {
        [self.coord(0, idx[0]), self.coord(1, idx[1]), self.coord(2, idx[2])]
    }

    /// Fractional grid index of a coordinate along an axis.
    pub fn fractional_index(&self, axis: usize, x: f64) -> f64 {
        (x - self.min[axis]) / self.spacing[axis]
    }

    pub fn zeros(&self) -> Field {
        Array3::zeros(self.n)
    }

    pub fn check_shape(&self, field: &Field) -> Result<()> {
        if field.shape() != self.n {
            return Err(WaveError::ShapeMismatch {
                expected: self.n.to_vec(),
                found: field.shape().to_vec(),
            });
        }
        Ok(())
    }

    /// True when the point lies inside the extents on every active axis.
    pub fn contains(&self, x: &[f64; 3]) -> bool {
        (0..self.dim).all(|a| x[a] >= self.min[a] && x[a] <= self.max[a])
    }

    /// True when the point lies inside the extents and outside the absorbing layer.
    pub fn in_interior(&self, x: &[f64; 3]) -> bool {
        let t = self.pml.thickness as f64;
        (0..self.dim).all(|a| {
            let f = self.fractional_index(a, x[a]);
            f >= t && f <= (self.n[a] - 1) as f64 - t
        })
    }

    /// Absorption profile along an axis at nodes (`staggered = false`) or +1/2 faces.
    pub fn pml_alpha(&self, axis: usize, staggered: bool) -> &[f64] {
        if staggered {
            &self.alpha_staggered[axis]
        } else {
            &self.alpha[axis]
        }
    }
}

/// f_max = c / (2 max dx).
pub fn max_supported_frequency(grid: &Grid, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(WaveError::NonPositiveSoundSpeed(c));
    }
    let dx = grid.spacings().iter().cloned().fold(0.0, f64::max);
    Ok(c / (2.0 * dx))
}

/// Λ = exp(-α dt / 2) along one axis; it broadcasts over the other axes.
pub fn pml_update_factor(grid: &Grid, axis: usize, dt: f64, staggered: bool) -> Array1<f64> {
    grid.pml_alpha(axis, staggered)
        .iter()
        .map(|a| (-a * dt / 2.0).exp())
        .collect()
}
