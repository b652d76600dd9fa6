//! Band-limited (truncated-sinc) point delta on a grid.

use std::f64::consts::PI;

use crate::error::{Result, WaveError};
use crate::grid::{Field, Grid};

pub const DEFAULT_THRESHOLD: f64 = 1e-6;

/// Dimensionless sinc weights for a contiguous run of indices along one axis.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisStencil {
    pub start: usize,
    pub weights: Vec<f64>,
}

impl AxisStencil {
    pub fn end(&self) -> usize {
        self.start + self.weights.len()
    }

    pub fn get(&self, i: usize) -> f64 {
        if i < self.start {
            return 0.0;
        }
        self.weights.get(i - self.start).copied().unwrap_or(0.0)
    }

    fn unit(i: usize) -> Self {
        AxisStencil {
            start: i,
            weights: vec![1.0],
        }
    }
}

/// Separable stencil ∏ sinc(π (X - x)/Δx) / Δx with weights below
/// `threshold` times the peak dropped.
#[derive(Clone, Debug)]
pub struct BandLimitedDelta {
    anchor: [f64; 3],
    axes: [AxisStencil; 3],
    threshold: f64,
    inv_volume: f64,
}

// Offsets closer than this (in cells) count as on-node, where the stencil collapses to one point.
const ON_NODE: f64 = 1e-10;

fn axis_stencil(n: usize, u: f64, threshold: f64) -> AxisStencil {
    let i0 = u.round();
    let frac = u - i0;
    let i0 = i0 as i64;
    if frac.abs() < ON_NODE {
        return AxisStencil::unit(i0.clamp(0, n as i64 - 1) as usize);
    }
    // sinc(n - frac) written to keep the sign pattern exact: -(-1)^m sin(π frac) / (π (m - frac))
    let s = (PI * frac).sin();
    let w: Vec<f64> = (0..n as i64)
        .map(|i| {
            let m = i - i0;
            let sign = if m.rem_euclid(2) == 0 { -1.0 } else { 1.0 };
            sign * s / (PI * (m as f64 - frac))
        })
        .collect();
    let peak = w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let cut = threshold * peak;
    let first = w.iter().position(|v| v.abs() >= cut).unwrap_or(0);
    let last = w.iter().rposition(|v| v.abs() >= cut).unwrap_or(0);
    let weights = w[first..=last]
        .iter()
        .map(|&v| if v.abs() >= cut { v } else { 0.0 })
        .collect();
    AxisStencil { start: first, weights }
}

impl BandLimitedDelta {
    /// Stencil for a delta at `x0`, sampled on nodes shifted by `shift` cells per axis
    /// (use +1/2 on an axis to target the staggered velocity positions).
    pub fn with_shift(grid: &Grid, x0: [f64; 3], threshold: f64, shift: [f64; 3]) -> Result<Self> {
        if !grid.contains(&x0) {
            return Err(WaveError::OutOfGrid(x0));
        }
        let dim = grid.dim();
        let mut axes: [AxisStencil; 3] = [AxisStencil::unit(0), AxisStencil::unit(0), AxisStencil::unit(0)];
        for (a, axis) in axes.iter_mut().enumerate().take(dim) {
            let u = grid.fractional_index(a, x0[a]) - shift[a];
            *axis = axis_stencil(grid.n(a), u, threshold);
        }
        Ok(BandLimitedDelta {
            anchor: x0,
            axes,
            threshold,
            inv_volume: 1.0 / grid.cell_volume(),
        })
    }

    pub fn anchor(&self) -> [f64; 3] {
        self.anchor
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn axis(&self, a: usize) -> &AxisStencil {
        &self.axes[a]
    }

    /// Half-open index ranges of the support box.
    pub fn support_box(&self) -> [(usize, usize); 3] {
        [
            (self.axes[0].start, self.axes[0].end()),
            (self.axes[1].start, self.axes[1].end()),
            (self.axes[2].start, self.axes[2].end()),
        ]
    }

    /// Weight at a node, including the 1/∏Δx factor.
    pub fn weight(&self, idx: [usize; 3]) -> f64 {
        self.axes[0].get(idx[0]) * self.axes[1].get(idx[1]) * self.axes[2].get(idx[2]) * self.inv_volume
    }

    /// Σ w ∏Δx over the grid.
    pub fn moment0(&self) -> f64 {
        self.axes.iter().map(|a| a.weights.iter().sum::<f64>()).product()
    }

    /// field += amplitude * δ_b.
    pub fn scatter_add(&self, field: &mut Field, amplitude: f64) {
        let a = amplitude * self.inv_volume;
        let [x, y, z] = &self.axes;
        let n2 = field.shape()[2];
        let n1 = field.shape()[1];
        let data = field.as_slice_mut().expect("fields are contiguous");
        for (i, wx) in x.weights.iter().enumerate() {
            let ax = a * wx;
            for (j, wy) in y.weights.iter().enumerate() {
                let axy = ax * wy;
                let base = ((x.start + i) * n1 + y.start + j) * n2 + z.start;
                for (d, wz) in data[base..base + z.weights.len()].iter_mut().zip(&z.weights) {
                    *d += axy * wz;
                }
            }
        }
    }

    /// Σ field(X) δ_b(X - x0) ∏Δx.
    pub fn sample(&self, field: &Field) -> f64 {
        let [x, y, z] = &self.axes;
        let n2 = field.shape()[2];
        let n1 = field.shape()[1];
        let data = field.as_slice().expect("fields are contiguous");
        let mut acc = 0.0;
        for (i, wx) in x.weights.iter().enumerate() {
            let mut row = 0.0;
            for (j, wy) in y.weights.iter().enumerate() {
                let base = ((x.start + i) * n1 + y.start + j) * n2 + z.start;
                let line: f64 = data[base..base + z.weights.len()]
                    .iter()
                    .zip(&z.weights)
                    .map(|(d, w)| d * w)
                    .sum();
                row += wy * line;
            }
            acc += wx * row;
        }
        acc
    }
}

/// Band-limited delta on the grid nodes.
pub fn band_limited_delta(grid: &Grid, x0: [f64; 3], threshold: f64) -> Result<BandLimitedDelta> {
    BandLimitedDelta::with_shift(grid, x0, threshold, [0.0; 3])
}

/// Off-grid pressure sample: adjoint of the delta injection.
pub fn sample_offgrid(field: &Field, position: [f64; 3], grid: &Grid) -> Result<f64> {
    grid.check_shape(field)?;
    Ok(band_limited_delta(grid, position, DEFAULT_THRESHOLD)?.sample(field))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, PmlConfig};

    fn grid() -> Grid {
        make_grid(&[0.0; 3], &[0.032; 3], &[0.001; 3], PmlConfig::none()).unwrap()
    }

    #[test]
    fn on_node_is_a_single_point() {
        let g = grid();
        let d = band_limited_delta(&g, [0.010, 0.011, 0.020], 1e-6).unwrap();
        assert_eq!(d.support_box(), [(10, 11), (11, 12), (20, 21)]);
        assert!((d.weight([10, 11, 20]) - 1e9).abs() < 1e-3);
    }

    #[test]
    fn outside_grid_is_rejected() {
        let g = grid();
        assert!(matches!(
            band_limited_delta(&g, [0.05, 0.01, 0.01], 1e-6),
            Err(WaveError::OutOfGrid(_))
        ));
    }

    #[test]
    fn coarse_threshold_shrinks_support() {
        let g = grid();
        let d = band_limited_delta(&g, [0.0163, 0.016, 0.016], 0.05).unwrap();
        let (lo, hi) = d.support_box()[0];
        assert!(hi - lo < 33 && lo > 0);
        for i in lo..hi {
            let w = d.axis(0).get(i);
            assert!(w == 0.0 || w.abs() >= 0.05 * 0.85);
        }
    }

    #[test]
    fn scatter_and_sample_are_adjoint() {
        let g = grid();
        let d = band_limited_delta(&g, [0.0123, 0.0161, 0.0177], 1e-6).unwrap();
        let mut f = g.zeros();
        d.scatter_add(&mut f, 2.5);
        let probe = Field::from_shape_fn(g.shape(), |(i, j, k)| ((i * 7 + j * 3 + k) % 11) as f64);
        let lhs: f64 = f.iter().zip(probe.iter()).map(|(a, b)| a * b).sum::<f64>() * g.cell_volume();
        let rhs = 2.5 * d.sample(&probe);
        assert!((lhs - rhs).abs() < 1e-10 * rhs.abs());
    }
}
