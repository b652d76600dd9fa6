//! Grid assembly of the discretised mass and momentum sources.
//!
//! Steps are 1-based: step 𝔱 sits at t = (𝔱 - 1) Δt. The update from 𝔱 to 𝔱+1
//! takes mass sources at the half step (𝔱 - 1/2) Δt and momentum sources at the
//! integer step (𝔱 - 1) Δt.

use std::collections::HashMap;

use ndarray::Array2;

use crate::delta::{BandLimitedDelta, DEFAULT_THRESHOLD};
use crate::error::{Result, WaveError};
use crate::geometry::{ApertureMesh, Vec3};
use crate::grid::{Field, Grid};
use crate::signal::{QuantityTag, SourcePulse};

#[derive(Clone, Debug)]
pub enum SourceTerm {
    /// Scalar field injected into the continuity equation.
    Mass(Field),
    /// One field per axis injected into the equation of motion.
    Momentum(Vec<Field>),
}

impl SourceTerm {
    pub fn fields(&self) -> &[Field] {
        match self {
            SourceTerm::Mass(f) => std::slice::from_ref(f),
            SourceTerm::Momentum(v) => v,
        }
    }
}

/// Support of a volumetric source.
#[derive(Clone, Debug)]
pub enum VolumeSource<'a> {
    Point(Vec3),
    Mesh(&'a ApertureMesh),
}

/// Time dependence shared by every vertex of a source.
#[derive(Clone, Debug)]
enum Drive {
    /// Δt Σ_{𝔱'≤𝔱} s((𝔱'-1)Δt), stored for the steps that cover the pulse.
    Cumulative(Vec<f64>),
    /// pulse((𝔱 - 1/2) Δt)
    HalfStep(SourcePulse, f64),
    /// pulse((𝔱 - 1) Δt)
    IntegerStep(SourcePulse, f64),
}

impl Drive {
    fn cumulative(pulse: &SourcePulse, dt: f64) -> Self {
        let end = pulse.series.t_end();
        let steps = (end / dt).ceil() as usize + 2;
        let mut acc = 0.0;
        let sums = (0..steps)
            .map(|m| {
                acc += pulse.value(m as f64 * dt);
                dt * acc
            })
            .collect();
        Drive::Cumulative(sums)
    }

    fn amplitude(&self, step: usize, dt: f64) -> f64 {
        let n = step.saturating_sub(1);
        match self {
            Drive::Cumulative(sums) => sums.get(n).or(sums.last()).copied().unwrap_or(0.0),
            Drive::HalfStep(p, scale) => scale * p.value((n as f64 + 0.5) * dt),
            Drive::IntegerStep(p, scale) => scale * p.value(n as f64 * dt),
        }
    }
}

/// Stencil-weighted sum of vertex deltas, Σ_j c_j δ_b(X - x_j), built once.
///
/// Vertices whose stencils along the last axis coincide are first summed on a
/// plane, which keeps flat apertures aligned with the grid cheap.
pub fn stencil_pattern(grid: &Grid, points: &[(Vec3, f64)], shift: [f64; 3], threshold: f64) -> Result<Field> {
    let [n0, n1, n2] = grid.shape();
    let mut groups: HashMap<u64, (BandLimitedDelta, Array2<f64>)> = HashMap::new();
    for (x, c) in points {
        if *c == 0.0 {
            continue;
        }
        let d = BandLimitedDelta::with_shift(grid, [x.x, x.y, x.z], threshold, shift)?;
        let key = if grid.dim() == 3 { x.z.to_bits() } else { 0 };
        let entry = groups
            .entry(key)
            .or_insert_with(|| (d.clone(), Array2::zeros((n0, n1))));
        let plane = &mut entry.1;
        let (ax, ay) = (d.axis(0), d.axis(1));
        for (i, wx) in ax.weights.iter().enumerate() {
            let cx = c * wx;
            for (j, wy) in ay.weights.iter().enumerate() {
                plane[[ax.start + i, ay.start + j]] += cx * wy;
            }
        }
    }
    let mut field = grid.zeros();
    let inv_volume = 1.0 / grid.cell_volume();
    for (d, plane) in groups.values() {
        let az = d.axis(2);
        let data = field.as_slice_mut().expect("fields are contiguous");
        for ((i, j), v) in plane.indexed_iter() {
            if *v == 0.0 {
                continue;
            }
            let base = (i * n1 + j) * n2 + az.start;
            for (f, wz) in data[base..base + az.weights.len()].iter_mut().zip(&az.weights) {
                *f += v * wz * inv_volume;
            }
        }
    }
    Ok(field)
}

fn staggered_shift(axis: usize) -> [f64; 3] {
    let mut s = [0.0; 3];
    s[axis] = 0.5;
    s
}

fn check_ap(a_p: f64) -> Result<()> {
    if a_p == 1.0 || a_p == 2.0 {
        Ok(())
    } else {
        Err(WaveError::BadApFactor(a_p))
    }
}

fn mesh_points(mesh: &ApertureMesh, scale: f64) -> Vec<(Vec3, f64)> {
    mesh.vertices()
        .iter()
        .copied()
        .zip(mesh.vertex_weights().into_iter().map(|w| w * scale))
        .collect()
}

/// A source whose every vertex shares one pulse: fixed spatial patterns times a scalar drive.
#[derive(Clone, Debug)]
pub struct GridSource {
    momentum: bool,
    patterns: Vec<Field>,
    drive: Drive,
    dt: f64,
}

impl GridSource {
    /// Volumetric mass source (cumulative rectangle-rule integral of s).
    pub fn mass_volumetric(grid: &Grid, support: &VolumeSource, pulse: &SourcePulse, dt: f64) -> Result<Self> {
        pulse.expect(QuantityTag::Source)?;
        let points = match support {
            VolumeSource::Point(x) => vec![(*x, 1.0)],
            VolumeSource::Mesh(m) => mesh_points(m, 1.0),
        };
        let pattern = stencil_pattern(grid, &points, [0.0; 3], DEFAULT_THRESHOLD)?;
        Ok(GridSource {
            momentum: false,
            patterns: vec![pattern],
            drive: Drive::cumulative(pulse, dt),
            dt,
        })
    }

    /// Monopole surface source driven by normal velocity: a_p ρ0 u^n.
    pub fn mass_monopole(
        grid: &Grid,
        mesh: &ApertureMesh,
        pulse: &SourcePulse,
        rho0: f64,
        a_p: f64,
        dt: f64,
    ) -> Result<Self> {
        pulse.expect(QuantityTag::NormalVelocity)?;
        check_ap(a_p)?;
        let pattern = stencil_pattern(grid, &mesh_points(mesh, 1.0), [0.0; 3], DEFAULT_THRESHOLD)?;
        Ok(GridSource {
            momentum: false,
            patterns: vec![pattern],
            drive: Drive::HalfStep(pulse.clone(), a_p * rho0),
            dt,
        })
    }

    /// Dipole surface source approximated as an omnidirectional mass source: -a_p p / c.
    /// Only valid when the aperture radiates like a point, which finite apertures do not.
    pub fn mass_dipole_farfield(
        grid: &Grid,
        mesh: &ApertureMesh,
        pulse: &SourcePulse,
        c: f64,
        a_p: f64,
        dt: f64,
    ) -> Result<Self> {
        pulse.expect(QuantityTag::Pressure)?;
        check_ap(a_p)?;
        if !(c > 0.0) {
            return Err(WaveError::NonPositiveSoundSpeed(c));
        }
        let pattern = stencil_pattern(grid, &mesh_points(mesh, 1.0), [0.0; 3], DEFAULT_THRESHOLD)?;
        Ok(GridSource {
            momentum: false,
            patterns: vec![pattern],
            drive: Drive::HalfStep(pulse.clone(), -a_p / c),
            dt,
        })
    }

    /// Dipole surface source as a momentum source a_p p n / ρ0, one field per axis,
    /// each sampled on that axis' staggered velocity positions.
    pub fn momentum_dipole(
        grid: &Grid,
        mesh: &ApertureMesh,
        pulse: &SourcePulse,
        rho0: f64,
        a_p: f64,
        dt: f64,
    ) -> Result<Self> {
        pulse.expect(QuantityTag::Pressure)?;
        check_ap(a_p)?;
        if !(rho0 > 0.0) {
            return Err(WaveError::NonPositiveDensity(rho0));
        }
        let weights = mesh.vertex_weights();
        let mut patterns = Vec::with_capacity(grid.dim());
        for axis in 0..grid.dim() {
            let points: Vec<(Vec3, f64)> = mesh
                .vertices()
                .iter()
                .zip(mesh.normals())
                .zip(&weights)
                .map(|((x, n), w)| (*x, w * n[axis]))
                .collect();
            patterns.push(stencil_pattern(
                grid,
                &points,
                staggered_shift(axis),
                DEFAULT_THRESHOLD,
            )?);
        }
        Ok(GridSource {
            momentum: true,
            patterns,
            drive: Drive::IntegerStep(pulse.clone(), a_p / rho0),
            dt,
        })
    }

    pub fn is_momentum(&self) -> bool {
        self.momentum
    }

    pub fn patterns(&self) -> &[Field] {
        &self.patterns
    }

    /// Scalar drive at step 𝔱.
    pub fn amplitude(&self, step: usize) -> f64 {
        self.drive.amplitude(step, self.dt)
    }

    pub fn assemble(&self, step: usize) -> SourceTerm {
        let a = self.amplitude(step);
        let fields: Vec<Field> = self.patterns.iter().map(|p| p * a).collect();
        if self.momentum {
            SourceTerm::Momentum(fields)
        } else {
            SourceTerm::Mass(fields.into_iter().next().expect("one mass pattern"))
        }
    }

    /// Adds the step-𝔱 source into `out` (one field for mass, one per axis for momentum).
    pub fn add_into(&self, step: usize, out: &mut [Field]) {
        let a = self.amplitude(step);
        if a == 0.0 {
            return;
        }
        for (o, p) in out.iter_mut().zip(&self.patterns) {
            o.scaled_add(a, p);
        }
    }
}

pub fn assemble_mass_volumetric(
    support: &VolumeSource,
    pulse: &SourcePulse,
    grid: &Grid,
    dt: f64,
    step: usize,
) -> Result<SourceTerm> {
    Ok(GridSource::mass_volumetric(grid, support, pulse, dt)?.assemble(step))
}

pub fn assemble_mass_monopole(
    mesh: &ApertureMesh,
    pulse: &SourcePulse,
    rho0: f64,
    a_p: f64,
    grid: &Grid,
    dt: f64,
    step: usize,
) -> Result<SourceTerm> {
    Ok(GridSource::mass_monopole(grid, mesh, pulse, rho0, a_p, dt)?.assemble(step))
}

pub fn assemble_mass_dipole_farfield(
    mesh: &ApertureMesh,
    pulse: &SourcePulse,
    c: f64,
    a_p: f64,
    grid: &Grid,
    dt: f64,
    step: usize,
) -> Result<SourceTerm> {
    Ok(GridSource::mass_dipole_farfield(grid, mesh, pulse, c, a_p, dt)?.assemble(step))
}

pub fn assemble_momentum_dipole(
    mesh: &ApertureMesh,
    pulse: &SourcePulse,
    rho0: f64,
    a_p: f64,
    grid: &Grid,
    dt: f64,
    step: usize,
) -> Result<SourceTerm> {
    Ok(GridSource::momentum_dipole(grid, mesh, pulse, rho0, a_p, dt)?.assemble(step))
}

/// Momentum source whose vertices each carry their own pressure trace, sampled at integer steps.
#[derive(Clone, Debug)]
pub struct VertexMomentumSource {
    // per vertex: per-axis (stencil, coefficient)
    stencils: Vec<Vec<(BandLimitedDelta, f64)>>,
    traces: Vec<Vec<f64>>,
}

impl VertexMomentumSource {
    /// `traces[j][𝔱 - 1]` is the pressure at vertex j and step 𝔱.
    pub fn new(grid: &Grid, mesh: &ApertureMesh, traces: Vec<Vec<f64>>, rho0: f64, a_p: f64) -> Result<Self> {
        if traces.len() != mesh.num_vertices() {
            return Err(WaveError::TraceMeshMismatch {
                traces: traces.len(),
                vertices: mesh.num_vertices(),
            });
        }
        check_ap(a_p)?;
        let weights = mesh.vertex_weights();
        let mut stencils = Vec::with_capacity(mesh.num_vertices());
        for ((x, n), w) in mesh.vertices().iter().zip(mesh.normals()).zip(&weights) {
            let mut per_axis = Vec::with_capacity(grid.dim());
            for axis in 0..grid.dim() {
                let d = BandLimitedDelta::with_shift(grid, [x.x, x.y, x.z], DEFAULT_THRESHOLD, staggered_shift(axis))?;
                per_axis.push((d, a_p * w * n[axis] / rho0));
            }
            stencils.push(per_axis);
        }
        Ok(VertexMomentumSource { stencils, traces })
    }

    pub fn add_into(&self, step: usize, out: &mut [Field]) {
        let n = step.saturating_sub(1);
        for (per_axis, trace) in self.stencils.iter().zip(&self.traces) {
            let p = trace.get(n).copied().unwrap_or(0.0);
            if p == 0.0 {
                continue;
            }
            for (field, (d, c)) in out.iter_mut().zip(per_axis) {
                if *c != 0.0 {
                    d.scatter_add(field, c * p);
                }
            }
        }
    }
}
