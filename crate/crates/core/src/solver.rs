//! Staggered leapfrog update of (u, ρ, p) with spectral gradients and a PML.

use ndarray::Zip;

use crate::delta::{BandLimitedDelta, DEFAULT_THRESHOLD};
use crate::error::{Result, WaveError};
use crate::geometry::{ApertureMesh, Vec3};
use crate::grid::{pml_update_factor, Field, Grid};
use crate::signal::TimeSeries;
use crate::source::{GridSource, VertexMomentumSource};
use crate::spectral::{SpectralOps, Stagger};

#[derive(Clone, Debug)]
pub struct Medium {
    c: Field,
    rho0: Field,
}

impl Medium {
    pub fn new(c: Field, rho0: Field) -> Result<Self> {
        if c.shape() != rho0.shape() {
            return Err(WaveError::ShapeMismatch {
                expected: c.shape().to_vec(),
                found: rho0.shape().to_vec(),
            });
        }
        if let Some(bad) = c.iter().find(|v| !(**v > 0.0)) {
            return Err(WaveError::NonPositiveSoundSpeed(*bad));
        }
        if let Some(bad) = rho0.iter().find(|v| !(**v > 0.0)) {
            return Err(WaveError::NonPositiveDensity(*bad));
        }
        Ok(Medium { c, rho0 })
    }

    pub fn homogeneous(grid: &Grid, c: f64, rho0: f64) -> Result<Self> {
        Medium::new(Field::from_elem(grid.shape(), c), Field::from_elem(grid.shape(), rho0))
    }

    pub fn c(&self) -> &Field {
        &self.c
    }

    pub fn rho0(&self) -> &Field {
        &self.rho0
    }

    pub fn c_max(&self) -> f64 {
        self.c.iter().cloned().fold(0.0, f64::max)
    }
}

/// Fields of Algorithm 1 at step 𝔱 (1-based; 𝔱 = 1 is the zero Cauchy state).
#[derive(Clone, Debug)]
pub struct SolverState {
    pub p: Field,
    /// Axis-split density deviation.
    pub rho: Vec<Field>,
    /// Velocity components on the +1/2 staggered faces.
    pub u: Vec<Field>,
    pub step: usize,
}

impl SolverState {
    pub fn new(grid: &Grid) -> Self {
        SolverState {
            p: grid.zeros(),
            rho: (0..grid.dim()).map(|_| grid.zeros()).collect(),
            u: (0..grid.dim()).map(|_| grid.zeros()).collect(),
            step: 1,
        }
    }

    pub fn time(&self, dt: f64) -> f64 {
        (self.step - 1) as f64 * dt
    }

    pub fn is_finite(&self) -> bool {
        self.p.iter().chain(self.u.iter().flatten()).all(|v| v.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CflPolicy {
    Advisory,
    Error,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Multiply spectral gradients by sinc(c_max |k| dt / 2).
    pub kspace_correction: bool,
    /// Bound on c_max dt / min dx.
    pub cfl_limit: f64,
    pub cfl_policy: CflPolicy,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            kspace_correction: false,
            cfl_limit: 0.3,
            cfl_policy: CflPolicy::Advisory,
        }
    }
}

pub struct Solver {
    grid: Grid,
    dt: f64,
    ops: SpectralOps,
    c2: Field,
    rho0: Field,
    inv_rho0: Field,
    lam_node: Vec<Vec<f64>>,
    lam_face: Vec<Vec<f64>>,
    ones: Vec<Vec<f64>>,
    deriv: Field,
}

impl Solver {
    pub fn new(grid: &Grid, medium: &Medium, dt: f64, config: &SolverConfig) -> Result<Self> {
        grid.check_shape(medium.c())?;
        if !(dt > 0.0) {
            return Err(WaveError::Config(format!("time step must be positive, got {dt}")));
        }
        let dx_min = grid.spacings().iter().cloned().fold(f64::INFINITY, f64::min);
        let c_max = medium.c_max();
        let limit = config.cfl_limit * dx_min / c_max;
        if dt > limit {
            match config.cfl_policy {
                CflPolicy::Advisory => log::warn!("dt = {dt:e} s exceeds the CFL advice {limit:e} s"),
                CflPolicy::Error => return Err(WaveError::CflViolation { dt, limit }),
            }
        }
        let mut ops = SpectralOps::new(grid);
        if config.kspace_correction {
            ops.set_kspace_correction(grid, c_max, dt);
        }
        let dim = grid.dim();
        let lam_node = (0..dim)
            .map(|a| pml_update_factor(grid, a, dt, false).to_vec())
            .collect();
        let lam_face = (0..dim)
            .map(|a| pml_update_factor(grid, a, dt, true).to_vec())
            .collect();
        let ones = (0..3).map(|a| vec![1.0; grid.n(a)]).collect();
        Ok(Solver {
            grid: grid.clone(),
            dt,
            ops,
            c2: medium.c().mapv(|c| c * c),
            rho0: medium.rho0().clone(),
            inv_rho0: medium.rho0().mapv(|r| 1.0 / r),
            lam_node,
            lam_face,
            ones,
            deriv: grid.zeros(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `state` by one step. `mass` is the scalar mass source at 𝔱+1/2,
    /// `momentum` the per-axis momentum source at 𝔱.
    pub fn step(&mut self, state: &mut SolverState, mass: Option<&Field>, momentum: Option<&[Field]>) -> Result<()> {
        let dim = self.grid.dim();
        if let Some(m) = mass {
            self.grid.check_shape(m)?;
        }
        if let Some(f) = momentum {
            if f.len() != dim {
                return Err(WaveError::ShapeMismatch {
                    expected: vec![dim],
                    found: vec![f.len()],
                });
            }
            for c in f {
                self.grid.check_shape(c)?;
            }
        }
        let dt = self.dt;

        self.ops.forward(&state.p);
        for axis in 0..dim {
            self.ops
                .derivative_from_spectrum(axis, Stagger::Forward, &mut self.deriv);
            let lam = self.axis_factors(axis, true);
            damped_update(
                &mut state.u[axis],
                &self.deriv,
                &self.inv_rho0,
                lam,
                dt,
                momentum.map(|f| (&f[axis], dt)),
            );
        }

        let share = dt / dim as f64;
        for axis in 0..dim {
            self.ops
                .derivative(&state.u[axis], axis, Stagger::Backward, &mut self.deriv);
            let lam = self.axis_factors(axis, false);
            damped_update(
                &mut state.rho[axis],
                &self.deriv,
                &self.rho0,
                lam,
                dt,
                mass.map(|m| (m, share)),
            );
        }

        let rho = &state.rho;
        Zip::indexed(&mut state.p).and(&self.c2).for_each(|idx, p, c2| {
            *p = c2 * rho.iter().map(|r| r[idx]).sum::<f64>();
        });
        state.step += 1;
        Ok(())
    }

    fn axis_factors(&self, axis: usize, face: bool) -> [&[f64]; 3] {
        let lam = if face {
            &self.lam_face[axis]
        } else {
            &self.lam_node[axis]
        };
        let mut out: [&[f64]; 3] = [&self.ones[0], &self.ones[1], &self.ones[2]];
        out[axis] = lam;
        out
    }
}

// f ← Λ(Λ f − dt·coef·deriv) + scale·src
fn damped_update(f: &mut Field, deriv: &Field, coef: &Field, lam: [&[f64]; 3], dt: f64, src: Option<(&Field, f64)>) {
    let [n0, n1, n2] = [f.shape()[0], f.shape()[1], f.shape()[2]];
    let fs = f.as_slice_mut().expect("contiguous");
    let ds = deriv.as_slice().expect("contiguous");
    let cs = coef.as_slice().expect("contiguous");
    let ss = src.map(|(s, k)| (s.as_slice().expect("contiguous"), k));
    for i0 in 0..n0 {
        for i1 in 0..n1 {
            let l01 = lam[0][i0] * lam[1][i1];
            let base = (i0 * n1 + i1) * n2;
            let range = base..base + n2;
            let (fr, dr, cr) = (&mut fs[range.clone()], &ds[range.clone()], &cs[range.clone()]);
            for i2 in 0..n2 {
                let l = l01 * lam[2][i2];
                fr[i2] = l * (l * fr[i2] - dt * cr[i2] * dr[i2]);
            }
            if let Some((s, k)) = ss {
                for (fv, sv) in fr.iter_mut().zip(&s[range]) {
                    *fv += k * sv;
                }
            }
        }
    }
}

/// One update of Algorithm 1 with a freshly built solver (convenient, not fast).
pub fn step(
    state: &mut SolverState,
    mass: Option<&Field>,
    momentum: Option<&[Field]>,
    grid: &Grid,
    medium: &Medium,
    dt: f64,
    config: &SolverConfig,
) -> Result<()> {
    Solver::new(grid, medium, dt, config)?.step(state, mass, momentum)
}

/// Per-step source supply for `run`. Steps are 1-based.
pub trait SourceSchedule {
    /// Adds the mass source for the update leaving step `step`; returns false if none.
    fn add_mass(&self, _step: usize, _out: &mut Field) -> bool {
        false
    }
    /// Adds the per-axis momentum source at `step`; returns false if none.
    fn add_momentum(&self, _step: usize, _out: &mut [Field]) -> bool {
        false
    }
}

/// No sources.
pub struct Silent;

impl SourceSchedule for Silent {}

impl SourceSchedule for GridSource {
    fn add_mass(&self, step: usize, out: &mut Field) -> bool {
        if self.is_momentum() {
            return false;
        }
        self.add_into(step, std::slice::from_mut(out));
        true
    }

    fn add_momentum(&self, step: usize, out: &mut [Field]) -> bool {
        if !self.is_momentum() {
            return false;
        }
        self.add_into(step, out);
        true
    }
}

impl SourceSchedule for VertexMomentumSource {
    fn add_momentum(&self, step: usize, out: &mut [Field]) -> bool {
        self.add_into(step, out);
        true
    }
}

impl<S: SourceSchedule> SourceSchedule for [S] {
    fn add_mass(&self, step: usize, out: &mut Field) -> bool {
        self.iter().fold(false, |any, s| s.add_mass(step, out) | any)
    }

    fn add_momentum(&self, step: usize, out: &mut [Field]) -> bool {
        self.iter().fold(false, |any, s| s.add_momentum(step, out) | any)
    }
}

#[derive(Clone, Debug)]
pub enum Sensor {
    Node([usize; 3]),
    Point(Vec3),
}

#[derive(Clone, Debug)]
pub struct PressureRecord {
    pub sensors: Vec<Sensor>,
    pub labels: Vec<String>,
    pub traces: Vec<TimeSeries>,
    pub dt: f64,
    pub n_t: usize,
}

impl PressureRecord {
    pub fn scaled(&self, a: f64) -> PressureRecord {
        let mut r = self.clone();
        r.traces = r.traces.iter().map(|t| t.scaled(a)).collect();
        r
    }
}

enum Probe {
    Node(usize),
    Delta(BandLimitedDelta),
}

impl Probe {
    fn read(&self, p: &Field) -> f64 {
        match self {
            Probe::Node(i) => p.as_slice().expect("contiguous")[*i],
            Probe::Delta(d) => d.sample(p),
        }
    }
}

fn probes(grid: &Grid, sensors: &[Sensor]) -> Result<Vec<Probe>> {
    let [_, n1, n2] = grid.shape();
    sensors
        .iter()
        .map(|s| match s {
            Sensor::Node(idx) => {
                if (0..3).any(|a| idx[a] >= grid.n(a)) {
                    return Err(WaveError::OutOfGrid(grid.position(*idx)));
                }
                Ok(Probe::Node((idx[0] * n1 + idx[1]) * n2 + idx[2]))
            }
            Sensor::Point(x) => Ok(Probe::Delta(BandLimitedDelta::with_shift(
                grid,
                [x.x, x.y, x.z],
                DEFAULT_THRESHOLD,
                [0.0; 3],
            )?)),
        })
        .collect()
}

/// Runs `n_t - 1` updates from the zero state, recording p at every step
/// (including the initial one). `observer` sees the state after each update.
pub fn run_with_observer(
    solver: &mut Solver,
    schedule: &(impl SourceSchedule + ?Sized),
    sensors: &[Sensor],
    labels: Vec<String>,
    n_t: usize,
    mut observer: impl FnMut(&SolverState),
) -> Result<PressureRecord> {
    let grid = solver.grid().clone();
    let dim = grid.dim();
    let probes = probes(&grid, sensors)?;
    let mut values: Vec<Vec<f64>> = vec![Vec::with_capacity(n_t); sensors.len()];
    let mut state = SolverState::new(&grid);
    let mut mass = grid.zeros();
    let mut momentum: Vec<Field> = (0..dim).map(|_| grid.zeros()).collect();
    let record = |state: &SolverState, values: &mut Vec<Vec<f64>>| {
        for (v, probe) in values.iter_mut().zip(&probes) {
            v.push(probe.read(&state.p));
        }
    };
    if n_t > 0 {
        record(&state, &mut values);
    }
    for step in 1..n_t {
        mass.fill(0.0);
        for m in &mut momentum {
            m.fill(0.0);
        }
        let has_mass = schedule.add_mass(step, &mut mass);
        let has_momentum = schedule.add_momentum(step, &mut momentum);
        solver.step(
            &mut state,
            has_mass.then_some(&mass),
            has_momentum.then_some(momentum.as_slice()),
        )?;
        if (step.is_multiple_of(32) || step + 1 == n_t) && !state.is_finite() {
            return Err(WaveError::NumericalFailure(state.step));
        }
        record(&state, &mut values);
        observer(&state);
    }
    let dt = solver.dt();
    Ok(PressureRecord {
        sensors: sensors.to_vec(),
        labels,
        traces: values.into_iter().map(|v| TimeSeries::new(dt, 0.0, v)).collect(),
        dt,
        n_t,
    })
}

pub fn run(
    solver: &mut Solver,
    schedule: &(impl SourceSchedule + ?Sized),
    sensors: &[Sensor],
    labels: Vec<String>,
    n_t: usize,
) -> Result<PressureRecord> {
    run_with_observer(solver, schedule, sensors, labels, n_t, |_| {})
}

/// A stored pressure field at step 𝔱.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub p: Field,
}

/// Back-projects time-reversed surface pressures: traces p(x_j, T - t) drive a
/// momentum source with inward normals; no mass source. Snapshots are kept
/// every `snapshot_every` steps from `first_snapshot` on, plus the final step.
#[allow(clippy::too_many_arguments)]
pub fn time_reverse_backproject(
    measured: &PressureRecord,
    surface: &ApertureMesh,
    grid: &Grid,
    medium: &Medium,
    rho0: f64,
    a_p: f64,
    config: &SolverConfig,
    first_snapshot: usize,
    snapshot_every: usize,
) -> Result<Vec<Snapshot>> {
    if measured.traces.len() != surface.num_vertices() || surface.num_vertices() == 0 {
        return Err(WaveError::TraceMeshMismatch {
            traces: measured.traces.len(),
            vertices: surface.num_vertices(),
        });
    }
    let n_t = measured.n_t;
    let reversed: Vec<Vec<f64>> = measured
        .traces
        .iter()
        .map(|t| {
            (1..=n_t)
                .map(|step| t.values.get(n_t - step).copied().unwrap_or(0.0))
                .collect()
        })
        .collect();
    let inward = surface.flipped();
    let source = VertexMomentumSource::new(grid, &inward, reversed, rho0, a_p)?;
    let mut solver = Solver::new(grid, medium, measured.dt, config)?;
    let every = snapshot_every.max(1);
    let mut snapshots = Vec::new();
    let dt = measured.dt;
    run_with_observer(&mut solver, &source, &[], Vec::new(), n_t, |state| {
        if (state.step >= first_snapshot && (state.step - first_snapshot).is_multiple_of(every)) || state.step == n_t {
            snapshots.push(Snapshot {
                step: state.step,
                time: state.time(dt),
                p: state.p.clone(),
            });
        }
    })?;
    Ok(snapshots)
}
