//! FFT-based staggered differentiation on periodic grids.
//!
//! Fields are transformed with a real-to-complex FFT along the last (contiguous)
//! axis followed by complex FFTs along the others, so spectra hold `n2/2 + 1`
//! entries on the last axis.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::error::{Result, WaveError};
use crate::grid::{Field, Grid};

/// Position at which a derivative is evaluated, in units of the grid spacing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stagger {
    /// Shift by +dx/2 (pressure gradient onto velocity faces).
    Forward,
    /// Shift by -dx/2 (velocity divergence back onto nodes).
    Backward,
    None,
}

impl Stagger {
    pub fn shift(self) -> f64 {
        match self {
            Stagger::Forward => 0.5,
            Stagger::Backward => -0.5,
            Stagger::None => 0.0,
        }
    }

    fn slot(self) -> usize {
        match self {
            Stagger::Forward => 0,
            Stagger::Backward => 1,
            Stagger::None => 2,
        }
    }
}

/// Angular wavenumber in standard DFT ordering (k = 0 at index 0, negative half after n/2).
pub fn wavenumbers(n: usize, dx: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let j = if 2 * i < n { i as i64 } else { i as i64 - n as i64 };
            2.0 * PI * j as f64 / (n as f64 * dx)
        })
        .collect()
}

fn is_nyquist(i: usize, n: usize) -> bool {
    n.is_multiple_of(2) && 2 * i == n
}

/// Spectral multiplier i k exp(i s k dx) for one axis. `half` keeps only the
/// non-negative half used by the real transform.
///
/// The unstaggered Nyquist entry is zeroed: i k is not Hermitian there and
/// would leak an imaginary part into the derivative of a real field.
pub fn derivative_multiplier(n: usize, dx: f64, stagger: Stagger, half: bool) -> Vec<Complex64> {
    let k = wavenumbers(n, dx);
    let len = if half { n / 2 + 1 } else { n };
    (0..len)
        .map(|i| {
            let ki = if half {
                2.0 * PI * i as f64 / (n as f64 * dx)
            } else {
                k[i]
            };
            if stagger == Stagger::None && is_nyquist(i, n) {
                return Complex64::new(0.0, 0.0);
            }
            Complex64::new(0.0, ki) * Complex64::from_polar(1.0, stagger.shift() * ki * dx)
        })
        .collect()
}

/// Wavenumber vectors of a grid plus the staggering phase factors.
#[derive(Clone, Debug)]
pub struct WavenumberField {
    pub k: Vec<Vec<f64>>,
    /// exp(+i k dx / 2) per axis.
    pub shift_forward: Vec<Vec<Complex64>>,
}

impl WavenumberField {
    pub fn new(grid: &Grid) -> Self {
        let k: Vec<Vec<f64>> = (0..grid.dim())
            .map(|a| wavenumbers(grid.n(a), grid.spacing(a)))
            .collect();
        let shift_forward = k
            .iter()
            .enumerate()
            .map(|(a, ka)| {
                ka.iter()
                    .map(|&x| Complex64::from_polar(1.0, x * grid.spacing(a) / 2.0))
                    .collect()
            })
            .collect();
        WavenumberField { k, shift_forward }
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Cached transforms and multipliers for one grid.
pub struct SpectralOps {
    shape: [usize; 3],
    half: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    axis_fwd: [Arc<dyn Fft<f64>>; 2],
    axis_inv: [Arc<dyn Fft<f64>>; 2],
    multipliers: Vec<[Vec<Complex64>; 3]>,
    kappa: Option<Vec<f64>>,
    spectrum: Vec<Complex64>,
    work: Vec<Complex64>,
    transposed: Vec<Complex64>,
    scratch: Vec<Complex64>,
    row: Vec<f64>,
}

impl SpectralOps {
    pub fn new(grid: &Grid) -> Self {
        let shape = grid.shape();
        let half = shape[2] / 2 + 1;
        let mut rplanner = RealFftPlanner::<f64>::new();
        let r2c = rplanner.plan_fft_forward(shape[2]);
        let c2r = rplanner.plan_fft_inverse(shape[2]);
        let mut planner = FftPlanner::<f64>::new();
        let axis_fwd = [planner.plan_fft_forward(shape[0]), planner.plan_fft_forward(shape[1])];
        let axis_inv = [planner.plan_fft_inverse(shape[0]), planner.plan_fft_inverse(shape[1])];
        let scratch_len = [
            r2c.get_scratch_len(),
            c2r.get_scratch_len(),
            axis_fwd[0].get_inplace_scratch_len(),
            axis_fwd[1].get_inplace_scratch_len(),
            axis_inv[0].get_inplace_scratch_len(),
            axis_inv[1].get_inplace_scratch_len(),
        ]
        .into_iter()
        .max()
        .unwrap_or(0);
        let multipliers = (0..grid.dim())
            .map(|a| {
                let n = shape[a];
                let dx = grid.spacing(a);
                let last = a == 2;
                [
                    derivative_multiplier(n, dx, Stagger::Forward, last),
                    derivative_multiplier(n, dx, Stagger::Backward, last),
                    derivative_multiplier(n, dx, Stagger::None, last),
                ]
            })
            .collect();
        let len = shape[0] * shape[1] * half;
        SpectralOps {
            shape,
            half,
            r2c,
            c2r,
            axis_fwd,
            axis_inv,
            multipliers,
            kappa: None,
            spectrum: vec![Complex64::default(); len],
            work: vec![Complex64::default(); len],
            transposed: vec![Complex64::default(); len],
            scratch: vec![Complex64::default(); scratch_len],
            row: vec![0.0; shape[2]],
        }
    }

    /// Enables the k-space temporal correction sinc(c_ref |k| dt / 2) on every derivative.
    pub fn set_kspace_correction(&mut self, grid: &Grid, c_ref: f64, dt: f64) {
        let [n0, n1, n2] = self.shape;
        let h = self.half;
        let k0 = wavenumbers(n0, grid.spacing(0));
        let k1 = wavenumbers(n1, grid.spacing(1));
        let k2: Vec<f64> = if grid.dim() == 3 {
            (0..h)
                .map(|i| 2.0 * PI * i as f64 / (n2 as f64 * grid.spacing(2)))
                .collect()
        } else {
            vec![0.0]
        };
        let mut kappa = Vec::with_capacity(n0 * n1 * h);
        for a in &k0 {
            for b in &k1 {
                for c in &k2 {
                    let k = (a * a + b * b + c * c).sqrt();
                    kappa.push(sinc(c_ref * k * dt / 2.0));
                }
            }
        }
        self.kappa = Some(kappa);
    }

    pub fn has_kspace_correction(&self) -> bool {
        self.kappa.is_some()
    }

    pub fn spectrum_len(&self) -> usize {
        self.spectrum.len()
    }

    /// Transforms `field` into the internal spectrum buffer.
    pub fn forward(&mut self, field: &Field) {
        let mut spec = std::mem::take(&mut self.spectrum);
        self.forward_into(field, &mut spec);
        self.spectrum = spec;
    }

    /// Unnormalised forward transform into a caller buffer of `spectrum_len()` entries.
    pub fn forward_into(&mut self, field: &Field, out: &mut [Complex64]) {
        let [n0, n1, n2] = self.shape;
        let h = self.half;
        let data = field.as_slice().expect("fields are contiguous");
        for r in 0..n0 * n1 {
            let src = &data[r * n2..(r + 1) * n2];
            let dst = &mut out[r * h..(r + 1) * h];
            if n2 == 1 {
                dst[0] = Complex64::new(src[0], 0.0);
            } else {
                self.row.copy_from_slice(src);
                self.r2c
                    .process_with_scratch(&mut self.row, dst, &mut self.scratch)
                    .expect("buffer sizes fixed at construction");
            }
        }
        self.transform_axes(out, false);
    }

    /// Inverse transform (normalised); `spec` is clobbered.
    pub fn inverse_from(&mut self, spec: &mut [Complex64], out: &mut Field) {
        let [n0, n1, n2] = self.shape;
        let h = self.half;
        self.transform_axes(spec, true);
        let scale = 1.0 / (n0 * n1 * n2) as f64;
        let data = out.as_slice_mut().expect("fields are contiguous");
        for r in 0..n0 * n1 {
            let src = &mut spec[r * h..(r + 1) * h];
            let dst = &mut data[r * n2..(r + 1) * n2];
            if n2 == 1 {
                dst[0] = src[0].re * scale;
                continue;
            }
            // round-off leaves tiny imaginary parts on the self-conjugate bins
            src[0].im = 0.0;
            if n2 % 2 == 0 {
                src[h - 1].im = 0.0;
            }
            self.c2r
                .process_with_scratch(src, dst, &mut self.scratch)
                .expect("buffer sizes fixed at construction");
            for v in dst.iter_mut() {
                *v *= scale;
            }
        }
    }

    fn transform_axes(&mut self, buf: &mut [Complex64], inverse: bool) {
        let [n0, n1, _] = self.shape;
        let h = self.half;
        let plane = n1 * h;
        let t = &mut self.transposed;
        let run = |fft: &Arc<dyn Fft<f64>>, data: &mut [Complex64], scratch: &mut [Complex64]| {
            fft.process_with_scratch(data, &mut scratch[..fft.get_inplace_scratch_len()]);
        };
        let order: [usize; 2] = if inverse { [0, 1] } else { [1, 0] };
        for axis in order {
            let fft = if inverse {
                &self.axis_inv[axis]
            } else {
                &self.axis_fwd[axis]
            };
            if axis == 1 {
                if n1 == 1 {
                    continue;
                }
                for i0 in 0..n0 {
                    let src = &mut buf[i0 * plane..(i0 + 1) * plane];
                    let tp = &mut t[i0 * plane..(i0 + 1) * plane];
                    transpose::transpose(src, tp, h, n1);
                    run(fft, tp, &mut self.scratch);
                    transpose::transpose(tp, src, n1, h);
                }
            } else {
                transpose::transpose(buf, t, plane, n0);
                run(fft, t, &mut self.scratch);
                transpose::transpose(t, buf, n0, plane);
            }
        }
    }

    /// Inverse transform of (stored spectrum) x multiplier(axis, stagger) [x kappa].
    pub fn derivative_from_spectrum(&mut self, axis: usize, stagger: Stagger, out: &mut Field) {
        let [n0, n1, _] = self.shape;
        let h = self.half;
        let m = &self.multipliers[axis][stagger.slot()];
        let mut work = std::mem::take(&mut self.work);
        for i0 in 0..n0 {
            for i1 in 0..n1 {
                let base = (i0 * n1 + i1) * h;
                let s = &self.spectrum[base..base + h];
                let w = &mut work[base..base + h];
                match axis {
                    0 => {
                        let f = m[i0];
                        for (wv, sv) in w.iter_mut().zip(s) {
                            *wv = sv * f;
                        }
                    }
                    1 => {
                        let f = m[i1];
                        for (wv, sv) in w.iter_mut().zip(s) {
                            *wv = sv * f;
                        }
                    }
                    _ => {
                        for ((wv, sv), f) in w.iter_mut().zip(s).zip(m) {
                            *wv = sv * f;
                        }
                    }
                }
                if let Some(kappa) = &self.kappa {
                    for (wv, kv) in w.iter_mut().zip(&kappa[base..base + h]) {
                        *wv *= kv;
                    }
                }
            }
        }
        self.inverse_from(&mut work, out);
        self.work = work;
    }

    /// Derivative of `field` along `axis`, written into `out`.
    pub fn derivative(&mut self, field: &Field, axis: usize, stagger: Stagger, out: &mut Field) {
        self.forward(field);
        self.derivative_from_spectrum(axis, stagger, out);
    }
}

/// One-shot spectral derivative (no k-space correction).
pub fn spectral_derivative(grid: &Grid, field: &Field, axis: usize, stagger: Stagger) -> Result<Field> {
    grid.check_shape(field)?;
    if axis >= grid.dim() {
        return Err(WaveError::AxisOutOfRange(axis));
    }
    let mut ops = SpectralOps::new(grid);
    let mut out = grid.zeros();
    ops.derivative(field, axis, stagger, &mut out);
    Ok(out)
}
