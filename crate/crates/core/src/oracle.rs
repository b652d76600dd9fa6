//! Analytic reference solutions: free-space Green's functions, the primary
//! point-source field and Rayleigh-Sommerfeld surface integrals.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Result, WaveError};
use crate::geometry::{ApertureMesh, ElementKind, Vec3};
use crate::signal::TimeSeries;

/// All spectra use the forward kernel e^{+iωt}.
pub const CONVENTION: &str = "exp(+i*omega*t)";

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSpectrum {
    pub frequencies: Vec<f64>,
    pub values: Vec<C64>,
}

impl ComplexSpectrum {
    pub fn new(frequencies: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        if frequencies.len() != values.len() {
            return Err(WaveError::ShapeMismatch {
                expected: vec![frequencies.len()],
                found: vec![values.len()],
            });
        }
        if frequencies.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(WaveError::Config(
                "spectrum frequencies must be strictly increasing".into(),
            ));
        }
        Ok(ComplexSpectrum { frequencies, values })
    }

    pub fn constant(frequencies: Vec<f64>, value: C64) -> Result<Self> {
        let n = frequencies.len();
        Self::new(frequencies, vec![value; n])
    }

    pub fn convention(&self) -> &'static str {
        CONVENTION
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn phases(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.arg()).collect()
    }

    pub fn scaled(&self, a: C64) -> ComplexSpectrum {
        ComplexSpectrum {
            frequencies: self.frequencies.clone(),
            values: self.values.iter().map(|v| v * a).collect(),
        }
    }
}

/// e^{ik x_d} / (4π x_d)
pub fn greens3d_freq(x_d: f64, f: f64, c: f64) -> Result<C64> {
    if !(x_d > 0.0) {
        return Err(WaveError::ZeroSeparation);
    }
    if !(c > 0.0) {
        return Err(WaveError::NonPositiveSoundSpeed(c));
    }
    let k = 2.0 * PI * f / c;
    Ok(C64::from_polar(1.0 / (4.0 * PI * x_d), k * x_d))
}

/// Raised when the large-argument form is evaluated at k x_d < 10.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticRangeWarning {
    pub kx: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Asymptotic {
    pub value: C64,
    pub warning: Option<AsymptoticRangeWarning>,
}

/// Large-argument 2D kernel [1/(8π k x_d)]^{1/2} e^{i(k x_d + π/4)}.
pub fn greens2d_freq_asymptotic(x_d: f64, f: f64, c: f64) -> Result<Asymptotic> {
    if !(x_d > 0.0) {
        return Err(WaveError::ZeroSeparation);
    }
    if !(f > 0.0) {
        return Err(WaveError::NonPositiveFrequency(f));
    }
    if !(c > 0.0) {
        return Err(WaveError::NonPositiveSoundSpeed(c));
    }
    let kx = 2.0 * PI * f / c * x_d;
    let warning = if kx < 10.0 {
        log::warn!("2D asymptotic kernel used at k x_d = {kx:.3} < 10");
        Some(AsymptoticRangeWarning { kx })
    } else {
        None
    };
    let value = C64::from_polar((1.0 / (8.0 * PI * kx)).sqrt(), kx + PI / 4.0);
    Ok(Asymptotic { value, warning })
}

/// Field of a point source with spectrum S at x0: G_+(|x - x0|) S.
pub fn primary_point_freq(x: &Vec3, x0: &Vec3, s: &ComplexSpectrum, c: f64) -> Result<ComplexSpectrum> {
    let r = (x - x0).norm();
    let values = s
        .frequencies
        .iter()
        .zip(&s.values)
        .map(|(f, v)| Ok(greens3d_freq(r, *f, c)? * v))
        .collect::<Result<Vec<_>>>()?;
    ComplexSpectrum::new(s.frequencies.clone(), values)
}

/// Time-domain counterpart of `primary_point_freq`: s(t - r/c) / (4π r).
pub fn primary_point_pressure(x: &Vec3, x0: &Vec3, s: &TimeSeries, c: f64, axis: TimeAxis) -> Result<TimeSeries> {
    let r = (x - x0).norm();
    if !(r > 0.0) {
        return Err(WaveError::ZeroSeparation);
    }
    let mut out = vec![0.0; axis.n];
    s.add_delayed(&mut out, axis.t0, axis.dt, r / c, 1.0 / (4.0 * PI * r));
    Ok(TimeSeries::new(axis.dt, axis.t0, out))
}

/// Output time axis for the time-domain oracles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeAxis {
    pub t0: f64,
    pub dt: f64,
    pub n: usize,
}

impl TimeAxis {
    pub fn new(dt: f64, n: usize) -> Self {
        TimeAxis { t0: 0.0, dt, n }
    }
}

// Quadrature node of one element seen from x.
struct ElementView {
    r: f64,
    obliquity: f64,
    area: f64,
}

fn on_triangle(x: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> bool {
    let n = (b - a).cross(&(c - a));
    let area2 = n.norm();
    let scale = (b - a).norm().max((c - a).norm());
    if (x - a).dot(&n).abs() > 1e-9 * area2 * scale {
        return false;
    }
    let inside = |p: &Vec3, q: &Vec3| (q - p).cross(&(x - p)).dot(&n) >= -1e-12 * area2 * scale;
    inside(a, b) && inside(b, c) && inside(c, a)
}

fn element_views(mesh: &ApertureMesh, x: &Vec3) -> Result<Vec<ElementView>> {
    let verts = mesh.vertices();
    let mut out = Vec::with_capacity(mesh.num_elements());
    for (e, el) in mesh.elements().iter().enumerate() {
        if mesh.kind() == ElementKind::Triangle && on_triangle(x, &verts[el[0]], &verts[el[1]], &verts[el[2]]) {
            return Err(WaveError::PointOnAperture);
        }
        let d = x - mesh.centroid(e);
        let r = d.norm();
        if r < 1e-12 {
            return Err(WaveError::PointOnAperture);
        }
        let n = mesh.element_normal(e);
        out.push(ElementView {
            r,
            obliquity: n.dot(&d) / r,
            area: mesh.measures()[e],
        });
    }
    Ok(out)
}

/// Rayleigh-Sommerfeld monopole integral of a uniform normal-velocity pulse,
/// one retarded term per element centroid.
pub fn monopole_pressure(
    mesh: &ApertureMesh,
    un: &TimeSeries,
    rho0: f64,
    c: f64,
    a_p: f64,
    x: &Vec3,
    axis: TimeAxis,
) -> Result<TimeSeries> {
    let views = element_views(mesh, x)?;
    let udot = un.derivative();
    let mut out = vec![0.0; axis.n];
    for v in &views {
        let coef = a_p * rho0 * v.area / (4.0 * PI * v.r);
        udot.add_delayed(&mut out, axis.t0, axis.dt, v.r / c, coef);
    }
    Ok(TimeSeries::new(axis.dt, axis.t0, out))
}

/// Obliquity-weighted dipole integral of a uniform surface-pressure pulse:
/// a_p Σ_e cosφ_e A_e/(4π r_e) [ṗ(t - r_e/c)/c + p(t - r_e/c)/r_e].
/// `include_near = false` keeps only the ṗ term.
#[allow(clippy::too_many_arguments)]
pub fn dipole_pressure(
    mesh: &ApertureMesh,
    p: &TimeSeries,
    c: f64,
    a_p: f64,
    x: &Vec3,
    axis: TimeAxis,
    include_near: bool,
) -> Result<TimeSeries> {
    let views = element_views(mesh, x)?;
    let pdot = p.derivative();
    let mut out = vec![0.0; axis.n];
    for v in &views {
        let w = a_p * v.obliquity * v.area / (4.0 * PI * v.r);
        pdot.add_delayed(&mut out, axis.t0, axis.dt, v.r / c, w / c);
        if include_near {
            p.add_delayed(&mut out, axis.t0, axis.dt, v.r / c, w / v.r);
        }
    }
    Ok(TimeSeries::new(axis.dt, axis.t0, out))
}

/// Far (−ik) and near (1/x_d) parts of the frequency-domain dipole integral.
/// `vertex_spectra[j]` is the surface pressure spectrum at vertex j; an element
/// takes the mean of its vertices.
pub fn dipole_terms_freq(
    mesh: &ApertureMesh,
    vertex_spectra: &[ComplexSpectrum],
    c: f64,
    a_p: f64,
    x: &Vec3,
) -> Result<(ComplexSpectrum, ComplexSpectrum)> {
    if vertex_spectra.len() != mesh.num_vertices() || vertex_spectra.is_empty() {
        return Err(WaveError::TraceMeshMismatch {
            traces: vertex_spectra.len(),
            vertices: mesh.num_vertices(),
        });
    }
    let freqs = vertex_spectra[0].frequencies.clone();
    if vertex_spectra.iter().any(|s| s.frequencies != freqs) {
        return Err(WaveError::Config("vertex spectra must share one frequency axis".into()));
    }
    let views = element_views(mesh, x)?;
    let mut far = vec![C64::new(0.0, 0.0); freqs.len()];
    let mut near = far.clone();
    for (el, v) in mesh.elements().iter().zip(&views) {
        let w = a_p * v.obliquity * v.area / (4.0 * PI * v.r);
        for (i, f) in freqs.iter().enumerate() {
            let pe = el.iter().map(|&j| vertex_spectra[j].values[i]).sum::<C64>() / el.len() as f64;
            let k = 2.0 * PI * f / c;
            let g = C64::from_polar(w, k * v.r) * pe;
            far[i] += g * C64::new(0.0, -k);
            near[i] += g / v.r;
        }
    }
    Ok((
        ComplexSpectrum::new(freqs.clone(), far)?,
        ComplexSpectrum::new(freqs, near)?,
    ))
}

pub fn dipole_pressure_freq(
    mesh: &ApertureMesh,
    vertex_spectra: &[ComplexSpectrum],
    c: f64,
    a_p: f64,
    x: &Vec3,
) -> Result<ComplexSpectrum> {
    let (far, near) = dipole_terms_freq(mesh, vertex_spectra, c, a_p, x)?;
    let values = far.values.iter().zip(&near.values).map(|(a, b)| a + b).collect();
    ComplexSpectrum::new(far.frequencies, values)
}

/// Rectangle-rule Fourier integral Σ f(t) e^{+iωt} Δt.
pub fn fourier_traces(record: &TimeSeries, frequencies: &[f64]) -> Result<ComplexSpectrum> {
    let nyquist = 0.5 / record.dt;
    let mut values = Vec::with_capacity(frequencies.len());
    for &f in frequencies {
        if !(f > 0.0 && f <= nyquist * (1.0 + 1e-12)) {
            return Err(WaveError::FrequencyOutOfRange { f, nyquist });
        }
        let w = 2.0 * PI * f;
        let step = C64::from_polar(1.0, w * record.dt);
        let mut phase = C64::from_polar(1.0, w * record.t0);
        let mut acc = C64::new(0.0, 0.0);
        for (i, v) in record.values.iter().enumerate() {
            // re-anchor periodically so the recurrence does not drift
            if i % 256 == 0 {
                phase = C64::from_polar(1.0, w * record.time(i));
            }
            acc += v * phase;
            phase *= step;
        }
        values.push(acc * record.dt);
    }
    ComplexSpectrum::new(frequencies.to_vec(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tessellate_disc;
    use crate::signal::tone_burst;

    #[test]
    fn greens_examples() {
        let g = greens3d_freq(1.0, 0.0, 1540.0).unwrap();
        assert!((g.re - 1.0 / (4.0 * PI)).abs() < 1e-15 && g.im == 0.0);
        let g = greens3d_freq(0.056, 1e6, 1540.0).unwrap();
        assert!((g.norm() - 1.0 / (4.0 * PI * 0.056)).abs() < 1e-12);
        let phase = (2.0 * PI * 1e6 / 1540.0 * 0.056).rem_euclid(2.0 * PI);
        assert!((g.arg().rem_euclid(2.0 * PI) - phase).abs() < 1e-9);
        assert!(matches!(
            greens3d_freq(0.0, 1e6, 1540.0),
            Err(WaveError::ZeroSeparation)
        ));
    }

    #[test]
    fn asymptotic_2d() {
        let c = 1540.0;
        let f = 1e6;
        let a = greens2d_freq_asymptotic(0.01, f, c).unwrap();
        let b = greens2d_freq_asymptotic(0.04, f, c).unwrap();
        assert!((a.value.norm() / b.value.norm() - 2.0).abs() < 1e-12);
        let x10 = 10.0 * c / (2.0 * PI * f);
        let v = greens2d_freq_asymptotic(x10, f, c).unwrap();
        assert!(v.warning.is_none());
        assert!((v.value.arg() - (10.0 + PI / 4.0 - 4.0 * PI)).abs() < 1e-9);
        let near = greens2d_freq_asymptotic(x10 / 10.0, f, c).unwrap();
        assert!(near.warning.is_some());
        assert!(matches!(
            greens2d_freq_asymptotic(0.01, 0.0, c),
            Err(WaveError::NonPositiveFrequency(_))
        ));
    }

    #[test]
    fn fourier_of_windowed_cosine() {
        let f0 = 1e5;
        let dt = 1e-7;
        let n = 1000; // ten periods
        let ts = TimeSeries::from_fn(dt, 0.0, n, |t| (2.0 * PI * f0 * t).cos());
        let s = fourier_traces(&ts, &[f0]).unwrap();
        let t = n as f64 * dt;
        assert!((s.values[0].re - t / 2.0).abs() < 1e-6 * t / 2.0);
        assert!(s.values[0].im.abs() < 1e-6 * t);
        assert!(matches!(
            fourier_traces(&ts, &[6e6]),
            Err(WaveError::FrequencyOutOfRange { .. })
        ));
    }

    #[test]
    fn point_on_aperture_is_rejected() {
        let m = tessellate_disc(0.008, Vec3::zeros(), Vec3::z(), 0.001).unwrap();
        let p = tone_burst(0.5e6, 3.0, 1.0, 4e-8);
        let r = monopole_pressure(
            &m,
            &p,
            1000.0,
            1540.0,
            2.0,
            &Vec3::new(0.001, 0.002, 0.0),
            TimeAxis::new(4e-8, 10),
        );
        assert!(matches!(r, Err(WaveError::PointOnAperture)));
        assert!(dipole_pressure(
            &m,
            &p,
            1540.0,
            2.0,
            &Vec3::new(0.0, 0.0, 0.01),
            TimeAxis::new(4e-8, 10),
            true
        )
        .is_ok());
    }
}
