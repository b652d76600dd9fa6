//! Config-driven reproductions of the point-source, disc and time-reversal
//! experiments, with the comparison metrics and output files.

mod config;
mod report;

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Axis;
use rayon::prelude::*;

pub use config::{parse_number, ExperimentConfig, ExperimentKind, PulseSpec, Scale};
pub use report::{
    relative_error, relative_error_field, relative_error_series, ErrorReport, ReceiverError, SnapshotError,
    RE_DEFINITION,
};

use crate::error::{Result, WaveError};
use crate::geometry::{
    fibonacci_hemisphere, perpendicular_frame, spherical_receivers, tessellate_disc, tessellate_sphere, ApertureMesh,
    ReceiverSet, Vec3,
};
use crate::grid::{make_grid, max_supported_frequency, Field, Grid, PmlConfig};
use crate::io;
use crate::oracle::{
    dipole_pressure, fourier_traces, monopole_pressure, primary_point_freq, primary_point_pressure, ComplexSpectrum,
    TimeAxis,
};
use crate::signal::{tone_burst, QuantityTag, SourcePulse, TimeSeries};
use crate::solver::{
    run_with_observer, time_reverse_backproject, Medium, PressureRecord, Sensor, Snapshot, Solver, SolverConfig,
};
use crate::source::{GridSource, VolumeSource};

fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn arr(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

/// Everything an experiment needs that can be checked without running it.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub grid: Grid,
    pub pulse: SourcePulse,
    pub receivers: ReceiverSet,
    /// Disc aperture or time-reversal sphere.
    pub mesh: Option<ApertureMesh>,
    pub n_t: usize,
}

fn pulse_tag(kind: ExperimentKind) -> QuantityTag {
    match kind {
        ExperimentKind::PointSource | ExperimentKind::TimeReversal => QuantityTag::Source,
        ExperimentKind::DiscMonopole => QuantityTag::NormalVelocity,
        ExperimentKind::DiscDipoleMomentum | ExperimentKind::DiscDipoleFarfieldMass => QuantityTag::Pressure,
    }
}

pub fn load_pulse(cfg: &ExperimentConfig) -> Result<SourcePulse> {
    let tag = pulse_tag(cfg.experiment);
    match &cfg.pulse {
        PulseSpec::Burst {
            center_hz,
            cycles,
            amplitude,
        } => {
            if !(*center_hz > 0.0) || !(*cycles > 0.0) {
                return Err(WaveError::Config(
                    "burst needs a positive centre frequency and cycle count".into(),
                ));
            }
            let dt = cfg.dt / cfg.pulse_oversampling.max(1) as f64;
            SourcePulse::new(tag, tone_burst(*center_hz, *cycles, *amplitude, dt))
        }
        PulseSpec::File(path) => {
            let p = SourcePulse::load(path)?;
            p.expect(tag)?;
            Ok(p)
        }
    }
}

pub fn build_grid(cfg: &ExperimentConfig) -> Result<Grid> {
    let dx = [cfg.spacing; 3];
    make_grid(
        &cfg.grid_min,
        &cfg.grid_max,
        &dx,
        PmlConfig::scaled_with(cfg.pml_thickness, cfg.pml_alpha, cfg.c, &dx),
    )
}

pub fn build_receivers(cfg: &ExperimentConfig) -> ReceiverSet {
    match cfg.experiment {
        ExperimentKind::PointSource => fibonacci_hemisphere(
            cfg.hemisphere_count,
            cfg.hemisphere_radius,
            v3(cfg.hemisphere_center),
            v3(cfg.hemisphere_pole),
        ),
        ExperimentKind::TimeReversal => ReceiverSet::default(),
        _ => spherical_receivers(
            &cfg.receiver_radii,
            &cfg.receiver_phis,
            &cfg.receiver_thetas,
            v3(cfg.disc_center),
            v3(cfg.disc_normal),
        ),
    }
}

/// Validates a config and builds the cheap parts of the experiment.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let fail = |m: String| Err(WaveError::Config(m));
    if !(cfg.c > 0.0) {
        return Err(WaveError::NonPositiveSoundSpeed(cfg.c));
    }
    if !(cfg.rho0 > 0.0) {
        return Err(WaveError::NonPositiveDensity(cfg.rho0));
    }
    if !(cfg.dt > 0.0) {
        return fail(format!("dt must be positive, got {}", cfg.dt));
    }
    if cfg.a_p != 1.0 && cfg.a_p != 2.0 {
        return Err(WaveError::BadApFactor(cfg.a_p));
    }
    if cfg.snapshot_axis > 2 {
        return fail(format!("snapshot_axis must be 0, 1 or 2, got {}", cfg.snapshot_axis));
    }
    if cfg.pulse_oversampling == 0 || cfg.snapshot_every == 0 {
        return fail("pulse_oversampling and snapshot_every must be at least 1".into());
    }
    let grid = build_grid(cfg)?;
    let pulse = load_pulse(cfg)?;
    let receivers = build_receivers(cfg);
    let interior = |what: &str, x: &Vec3| {
        if grid.in_interior(&arr(x)) {
            Ok(())
        } else {
            Err(WaveError::Config(format!(
                "{what} at {:?} lies outside the grid interior",
                arr(x)
            )))
        }
    };
    for (l, x) in receivers.labels.iter().zip(&receivers.positions) {
        interior(&format!("receiver {l}"), x)?;
    }
    let t_pulse = pulse.series.t_end();
    let (mesh, duration) = match cfg.experiment {
        ExperimentKind::PointSource => {
            if cfg.hemisphere_count == 0 || cfg.analysis_frequencies == 0 {
                return fail("point_source needs receivers and analysis frequencies".into());
            }
            let x0 = v3(cfg.source_position);
            interior("source", &x0)?;
            let far = receivers.positions.iter().map(|p| (p - x0).norm()).fold(0.0, f64::max);
            (None, far / cfg.c + t_pulse)
        }
        ExperimentKind::TimeReversal => {
            let x0 = v3(cfg.source_position);
            interior("source", &x0)?;
            let mesh = tessellate_sphere(cfg.sphere_radius, v3(cfg.sphere_center), cfg.sphere_max_edge)?;
            for v in mesh.vertices() {
                interior("sphere vertex", v)?;
            }
            let far = mesh.vertices().iter().map(|p| (p - x0).norm()).fold(0.0, f64::max);
            // padding of one traversal so the recorded field has left the interior
            (Some(mesh), far / cfg.c + t_pulse + 2.0 * cfg.sphere_radius / cfg.c)
        }
        _ => {
            let center = v3(cfg.disc_center);
            let mesh = tessellate_disc(cfg.disc_radius, center, v3(cfg.disc_normal), cfg.mesh_max_edge)?;
            for v in mesh.vertices() {
                interior("disc vertex", v)?;
            }
            let far = receivers
                .positions
                .iter()
                .map(|p| (p - center).norm())
                .fold(0.0, f64::max);
            let d = (far + cfg.disc_radius) / cfg.c + t_pulse;
            (Some(mesh), d.max(cfg.snapshot_time))
        }
    };
    let needed = (duration / cfg.dt - 1e-9).ceil() as usize + 1;
    let n_t = match cfg.n_t {
        Some(n) if n < needed => {
            return fail(format!(
                "n_t = {n} covers {:.3e} s but the last arrival plus pulse needs {:.3e} s ({needed} steps)",
                (n.max(1) - 1) as f64 * cfg.dt,
                duration
            ))
        }
        Some(n) => n,
        None => needed,
    };
    Ok(Prepared {
        grid,
        pulse,
        receivers,
        mesh,
        n_t,
    })
}

/// A set of traces that share one time axis.
#[derive(Clone, Debug)]
pub struct NamedTraces {
    pub name: String,
    pub labels: Vec<String>,
    pub traces: Vec<TimeSeries>,
}

/// A field slice through the grid, stored with a singleton axis.
#[derive(Clone, Debug)]
pub struct PlaneSnapshot {
    pub name: String,
    pub time: f64,
    pub axis: usize,
    pub index: usize,
    pub spacing: [f64; 3],
    pub field: Field,
}

#[derive(Clone, Debug)]
pub struct SpectrumComparison {
    pub label: String,
    pub distance: f64,
    pub full_field: ComplexSpectrum,
    pub oracle: ComplexSpectrum,
}

impl SpectrumComparison {
    /// |FF| / |oracle| − 1 per frequency.
    pub fn amplitude_errors(&self) -> Vec<f64> {
        self.full_field
            .values
            .iter()
            .zip(&self.oracle.values)
            .map(|(a, b)| a.norm() / b.norm() - 1.0)
            .collect()
    }

    /// arg(FF / oracle) per frequency, in (−π, π].
    pub fn phase_errors(&self) -> Vec<f64> {
        self.full_field
            .values
            .iter()
            .zip(&self.oracle.values)
            .map(|(a, b)| (a / b).arg())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FocusMetrics {
    pub peak_index: [usize; 3],
    pub peak_position: [f64; 3],
    pub peak_value: f64,
    pub peak_time: f64,
    pub location_error: f64,
    pub location_error_cells: f64,
    pub peak_to_sidelobe: f64,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub n_t: usize,
    pub grid_shape: [usize; 3],
    pub traces: Vec<NamedTraces>,
    pub snapshots: Vec<PlaneSnapshot>,
    pub spectra: Vec<SpectrumComparison>,
    pub reports: Vec<ErrorReport>,
    pub focus: Option<FocusMetrics>,
    /// Headline numbers, also written to the manifest.
    pub summary: Vec<(String, f64)>,
}

impl RunOutput {
    fn new(cfg: &ExperimentConfig, prep: &Prepared) -> Self {
        RunOutput {
            config: cfg.clone(),
            n_t: prep.n_t,
            grid_shape: prep.grid.shape(),
            traces: Vec::new(),
            snapshots: Vec::new(),
            spectra: Vec::new(),
            reports: Vec::new(),
            focus: None,
            summary: Vec::new(),
        }
    }

    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn report(&self, variant: &str) -> Option<&ErrorReport> {
        self.reports.iter().find(|r| r.variant == variant)
    }

    pub fn manifest(&self) -> String {
        let mut s = String::from("# wavekit run manifest\n");
        s.push_str(&self.config.to_text());
        let g = self.grid_shape;
        let _ = writeln!(s, "resolved_n_t = {}", self.n_t);
        let _ = writeln!(s, "grid_points = {},{},{}", g[0], g[1], g[2]);
        let _ = writeln!(s, "re_definition = {RE_DEFINITION}");
        let _ = writeln!(s, "spectrum_convention = {}", crate::oracle::CONVENTION);
        for (k, v) in &self.summary {
            let _ = writeln!(s, "{k} = {v:.9e}");
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for t in &self.traces {
            io::write_traces_csv(&dir.join(format!("traces_{}.csv", t.name)), &t.labels, &t.traces)?;
        }
        for s in &self.snapshots {
            io::save_snapshot(
                &dir.join(format!("snapshot_{}.bin", s.name)),
                &s.field,
                s.spacing,
                s.time,
            )?;
        }
        for r in &self.reports {
            std::fs::write(dir.join(format!("error_{}.csv", r.variant)), r.to_csv())?;
            if !r.snapshots.is_empty() {
                std::fs::write(dir.join(format!("snapshot_error_{}.csv", r.variant)), r.snapshots_csv())?;
            }
        }
        if !self.spectra.is_empty() {
            let sdir = dir.join("spectra");
            std::fs::create_dir_all(&sdir)?;
            let mut table = String::from(
                "receiver,distance_m,frequency_hz,full_field_abs,oracle_abs,amplitude_error,phase_error_rad\n",
            );
            for c in &self.spectra {
                std::fs::write(
                    sdir.join(format!("{}_full_field.csv", c.label)),
                    io::spectrum_to_csv(&c.full_field),
                )?;
                std::fs::write(
                    sdir.join(format!("{}_oracle.csv", c.label)),
                    io::spectrum_to_csv(&c.oracle),
                )?;
                for (k, (a, p)) in c.amplitude_errors().iter().zip(c.phase_errors()).enumerate() {
                    let _ = writeln!(
                        table,
                        "{},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
                        c.label,
                        c.distance,
                        c.oracle.frequencies[k],
                        c.full_field.values[k].norm(),
                        c.oracle.values[k].norm(),
                        a,
                        p
                    );
                }
            }
            std::fs::write(dir.join("spectra_comparison.csv"), table)?;
        }
        std::fs::write(dir.join("manifest.txt"), self.manifest())?;
        Ok(())
    }
}

fn solver_config(cfg: &ExperimentConfig) -> SolverConfig {
    SolverConfig {
        kspace_correction: cfg.kspace_correction,
        ..SolverConfig::default()
    }
}

fn point_sensors(rx: &ReceiverSet) -> Vec<Sensor> {
    rx.positions.iter().map(|p| Sensor::Point(*p)).collect()
}

fn snapshot_step(cfg: &ExperimentConfig) -> usize {
    (cfg.snapshot_time / cfg.dt).round() as usize + 1
}

fn plane_index(grid: &Grid, cfg: &ExperimentConfig) -> usize {
    let a = cfg.snapshot_axis;
    (grid.fractional_index(a, cfg.snapshot_position).round().max(0.0) as usize).min(grid.n(a) - 1)
}

fn extract_plane(field: &Field, axis: usize, index: usize) -> Field {
    field.index_axis(Axis(axis), index).insert_axis(Axis(axis)).to_owned()
}

/// Runs one full-field simulation, returning the record and the snapshot plane.
fn simulate(
    cfg: &ExperimentConfig,
    prep: &Prepared,
    medium: &Medium,
    source: &GridSource,
    sensors: &[Sensor],
) -> Result<(PressureRecord, Field)> {
    let mut solver = Solver::new(&prep.grid, medium, cfg.dt, &solver_config(cfg))?;
    let target = snapshot_step(cfg);
    let index = plane_index(&prep.grid, cfg);
    let mut plane = None;
    let record = run_with_observer(
        &mut solver,
        source,
        sensors,
        prep.receivers.labels.clone(),
        prep.n_t,
        |st| {
            if st.step == target {
                plane = Some(extract_plane(&st.p, cfg.snapshot_axis, index));
            }
        },
    )?;
    let plane = plane.unwrap_or_else(|| {
        let mut shape = prep.grid.shape();
        shape[cfg.snapshot_axis] = 1;
        Field::zeros(shape)
    });
    Ok((record, plane))
}

/// Oracle values on the snapshot plane (interior nodes only; the layer is left at zero).
fn oracle_plane(
    prep: &Prepared,
    cfg: &ExperimentConfig,
    eval: impl Fn(&Vec3, TimeAxis) -> Result<f64> + Sync,
) -> Result<Field> {
    let grid = &prep.grid;
    let axis = cfg.snapshot_axis;
    let index = plane_index(grid, cfg);
    let mut shape = grid.shape();
    shape[axis] = 1;
    let t = (snapshot_step(cfg) - 1) as f64 * cfg.dt;
    let one = TimeAxis {
        t0: t,
        dt: cfg.dt,
        n: 1,
    };
    let nodes: Vec<[usize; 3]> = ndarray::indices(shape)
        .into_iter()
        .map(|(i, j, k)| {
            let mut idx = [i, j, k];
            idx[axis] = index;
            idx
        })
        .collect();
    let values = nodes
        .par_iter()
        .map(|idx| {
            let x = grid.position(*idx);
            if !grid.in_interior(&x) {
                return Ok(0.0);
            }
            eval(&v3(x), one)
        })
        .collect::<Result<Vec<f64>>>()?;
    Field::from_shape_vec(shape, values).map_err(|e| WaveError::Config(e.to_string()))
}

fn interior_mask_re(prep: &Prepared, cfg: &ExperimentConfig, approx: &Field, reference: &Field) -> Result<f64> {
    let grid = &prep.grid;
    let index = plane_index(grid, cfg);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for ((idx, x), y) in approx.indexed_iter().zip(reference.iter()) {
        let mut n = [idx.0, idx.1, idx.2];
        n[cfg.snapshot_axis] = index;
        if grid.in_interior(&grid.position(n)) {
            a.push(*x);
            b.push(*y);
        }
    }
    relative_error(&a, &b)
}

fn disc_report(
    cfg: &ExperimentConfig,
    prep: &Prepared,
    variant: &str,
    ff: &[TimeSeries],
    oracle: &[TimeSeries],
) -> Result<ErrorReport> {
    let receivers = prep
        .receivers
        .labels
        .iter()
        .zip(&prep.receivers.tags)
        .zip(ff.iter().zip(oracle))
        .map(|((label, tag), (a, b))| {
            let t = tag.unwrap_or(crate::geometry::SphericalTag {
                r: 0.0,
                phi: 0.0,
                theta: 0.0,
            });
            Ok(ReceiverError {
                label: label.clone(),
                r: t.r,
                phi: t.phi,
                theta: t.theta,
                re: relative_error_series(a, b)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let g = prep.grid.shape();
    Ok(ErrorReport {
        experiment: cfg.experiment.name().into(),
        variant: variant.into(),
        scale: cfg.scale.name().into(),
        grid: format!("{}x{}x{} dx={:e}", g[0], g[1], g[2], cfg.spacing),
        receivers,
        snapshots: Vec::new(),
    })
}

fn push_disc_summary(out: &mut RunOutput, report: &ErrorReport) {
    out.summary
        .push((format!("max_re_{}", report.variant), report.max_re()));
    out.summary
        .push((format!("theta_spread_{}", report.variant), report.theta_group_spread()));
    for s in &report.snapshots {
        out.summary.push((format!("snapshot_re_{}", report.variant), s.re));
    }
}

fn plane_snapshot(name: &str, cfg: &ExperimentConfig, prep: &Prepared, field: Field) -> PlaneSnapshot {
    PlaneSnapshot {
        name: name.into(),
        time: (snapshot_step(cfg) - 1) as f64 * cfg.dt,
        axis: cfg.snapshot_axis,
        index: plane_index(&prep.grid, cfg),
        spacing: [cfg.spacing; 3],
        field,
    }
}

fn monopole_oracle(cfg: &ExperimentConfig, prep: &Prepared) -> Result<(Vec<TimeSeries>, Field)> {
    let mesh = prep.mesh.as_ref().expect("disc mesh");
    let axis = TimeAxis::new(cfg.dt, prep.n_t);
    let traces = prep
        .receivers
        .positions
        .par_iter()
        .map(|x| monopole_pressure(mesh, &prep.pulse.series, cfg.rho0, cfg.c, cfg.a_p, x, axis))
        .collect::<Result<Vec<_>>>()?;
    let plane = oracle_plane(prep, cfg, |x, one| {
        Ok(monopole_pressure(mesh, &prep.pulse.series, cfg.rho0, cfg.c, cfg.a_p, x, one)?.values[0])
    })?;
    Ok((traces, plane))
}

fn dipole_oracle(cfg: &ExperimentConfig, prep: &Prepared) -> Result<(Vec<TimeSeries>, Field)> {
    let mesh = prep.mesh.as_ref().expect("disc mesh");
    let axis = TimeAxis::new(cfg.dt, prep.n_t);
    let traces = prep
        .receivers
        .positions
        .par_iter()
        .map(|x| dipole_pressure(mesh, &prep.pulse.series, cfg.c, cfg.a_p, x, axis, true))
        .collect::<Result<Vec<_>>>()?;
    let plane = oracle_plane(prep, cfg, |x, one| {
        Ok(dipole_pressure(mesh, &prep.pulse.series, cfg.c, cfg.a_p, x, one, true)?.values[0])
    })?;
    Ok((traces, plane))
}

/// Disc with a rigid-baffle (monopole) source: mass source vs the monopole integral.
pub fn run_disc_monopole(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let prep = prepare(cfg)?;
    let mesh = prep.mesh.as_ref().expect("disc mesh");
    let medium = Medium::homogeneous(&prep.grid, cfg.c, cfg.rho0)?;
    let source = GridSource::mass_monopole(&prep.grid, mesh, &prep.pulse, cfg.rho0, cfg.a_p, cfg.dt)?;
    let sensors = point_sensors(&prep.receivers);
    let (sim, oracle) = rayon::join(
        || simulate(cfg, &prep, &medium, &source, &sensors),
        || monopole_oracle(cfg, &prep),
    );
    let (record, plane) = sim?;
    let (oracle, oracle_plane) = oracle?;
    let mut out = RunOutput::new(cfg, &prep);
    let mut report = disc_report(cfg, &prep, "monopole", &record.traces, &oracle)?;
    let time = (snapshot_step(cfg) - 1) as f64 * cfg.dt;
    report.snapshots.push(SnapshotError {
        label: "plane".into(),
        time,
        re: interior_mask_re(&prep, cfg, &plane, &oracle_plane)?,
    });
    push_disc_summary(&mut out, &report);
    out.reports.push(report);
    out.traces.push(NamedTraces {
        name: "full_field".into(),
        labels: record.labels.clone(),
        traces: record.traces,
    });
    out.traces.push(NamedTraces {
        name: "oracle".into(),
        labels: prep.receivers.labels.clone(),
        traces: oracle,
    });
    out.snapshots.push(plane_snapshot("full_field", cfg, &prep, plane));
    out.snapshots.push(plane_snapshot("oracle", cfg, &prep, oracle_plane));
    Ok(out)
}

/// Disc with a soft-baffle (dipole) source: momentum source and far-field mass
/// source, both against the obliquity-weighted dipole integral.
pub fn run_disc_dipole(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let prep = prepare(cfg)?;
    let mesh = prep.mesh.as_ref().expect("disc mesh");
    let medium = Medium::homogeneous(&prep.grid, cfg.c, cfg.rho0)?;
    let momentum = GridSource::momentum_dipole(&prep.grid, mesh, &prep.pulse, cfg.rho0, cfg.a_p, cfg.dt)?;
    let mass = GridSource::mass_dipole_farfield(&prep.grid, mesh, &prep.pulse, cfg.c, cfg.a_p, cfg.dt)?;
    let sensors = point_sensors(&prep.receivers);
    let (sims, oracle) = rayon::join(
        || -> Result<_> {
            Ok((
                simulate(cfg, &prep, &medium, &momentum, &sensors)?,
                simulate(cfg, &prep, &medium, &mass, &sensors)?,
            ))
        },
        || dipole_oracle(cfg, &prep),
    );
    let ((rec_m, plane_m), (rec_f, plane_f)) = sims?;
    let (oracle, oracle_plane) = oracle?;
    let mut out = RunOutput::new(cfg, &prep);
    let time = (snapshot_step(cfg) - 1) as f64 * cfg.dt;
    for (variant, rec, plane) in [("momentum", &rec_m, &plane_m), ("farfield_mass", &rec_f, &plane_f)] {
        let mut report = disc_report(cfg, &prep, variant, &rec.traces, &oracle)?;
        report.snapshots.push(SnapshotError {
            label: "plane".into(),
            time,
            re: interior_mask_re(&prep, cfg, plane, &oracle_plane)?,
        });
        push_disc_summary(&mut out, &report);
        out.reports.push(report);
    }
    out.traces.push(NamedTraces {
        name: "momentum".into(),
        labels: rec_m.labels.clone(),
        traces: rec_m.traces,
    });
    out.traces.push(NamedTraces {
        name: "farfield_mass".into(),
        labels: rec_f.labels.clone(),
        traces: rec_f.traces,
    });
    out.traces.push(NamedTraces {
        name: "oracle".into(),
        labels: prep.receivers.labels.clone(),
        traces: oracle,
    });
    out.snapshots.push(plane_snapshot("momentum", cfg, &prep, plane_m));
    out.snapshots.push(plane_snapshot("farfield_mass", cfg, &prep, plane_f));
    out.snapshots.push(plane_snapshot("oracle", cfg, &prep, oracle_plane));
    Ok(out)
}

fn analysis_frequencies(cfg: &ExperimentConfig, grid: &Grid) -> Result<Vec<f64>> {
    let f_max = max_supported_frequency(grid, cfg.c)?;
    let n = cfg.analysis_frequencies;
    Ok((1..=n).map(|k| k as f64 / n as f64 * f_max).collect())
}

/// Point emitter on the hemisphere: full-field spectra vs G_+ S at every receiver.
pub fn run_point_source(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let prep = prepare(cfg)?;
    let x0 = v3(cfg.source_position);
    let medium = Medium::homogeneous(&prep.grid, cfg.c, cfg.rho0)?;
    let source = GridSource::mass_volumetric(&prep.grid, &VolumeSource::Point(x0), &prep.pulse, cfg.dt)?;
    let sensors = point_sensors(&prep.receivers);
    let (record, _) = simulate(cfg, &prep, &medium, &source, &sensors)?;

    let freqs = analysis_frequencies(cfg, &prep.grid)?;
    let f_max = max_supported_frequency(&prep.grid, cfg.c)?;
    let s = fourier_traces(&prep.pulse.series, &freqs)?;
    let axis = TimeAxis::new(cfg.dt, prep.n_t);
    let pole = v3(cfg.hemisphere_pole).normalize();
    let (e1, e2) = perpendicular_frame(&pole);
    let center = v3(cfg.hemisphere_center);

    let mut out = RunOutput::new(cfg, &prep);
    let mut oracle_traces = Vec::new();
    let mut rows = Vec::new();
    let (mut worst_amp, mut worst_phase, mut judged) = (0.0f64, 0.0f64, 0usize);
    for ((label, x), trace) in prep
        .receivers
        .labels
        .iter()
        .zip(&prep.receivers.positions)
        .zip(&record.traces)
    {
        let oracle = primary_point_pressure(x, &x0, &prep.pulse.series, cfg.c, axis)?;
        let cmp = SpectrumComparison {
            label: label.clone(),
            distance: (x - x0).norm(),
            full_field: fourier_traces(trace, &freqs)?,
            oracle: primary_point_freq(x, &x0, &s, cfg.c)?,
        };
        if cmp.distance >= cfg.analysis_min_distance {
            judged += 1;
            for ((f, a), p) in freqs.iter().zip(cmp.amplitude_errors()).zip(cmp.phase_errors()) {
                if *f <= cfg.analysis_max_fraction * f_max * (1.0 + 1e-12) {
                    worst_amp = worst_amp.max(a.abs());
                    worst_phase = worst_phase.max(p.abs());
                }
            }
        }
        let d = x - center;
        rows.push(ReceiverError {
            label: label.clone(),
            r: cmp.distance,
            phi: d.normalize().dot(&pole).clamp(-1.0, 1.0).acos(),
            theta: d.dot(&e2).atan2(d.dot(&e1)),
            re: relative_error_series(trace, &oracle)?,
        });
        oracle_traces.push(oracle);
        out.spectra.push(cmp);
    }
    let g = prep.grid.shape();
    let report = ErrorReport {
        experiment: cfg.experiment.name().into(),
        variant: "point".into(),
        scale: cfg.scale.name().into(),
        grid: format!("{}x{}x{} dx={:e}", g[0], g[1], g[2], cfg.spacing),
        receivers: rows,
        snapshots: Vec::new(),
    };
    out.summary.push(("max_re_point".into(), report.max_re()));
    out.summary.push(("judged_receivers".into(), judged as f64));
    out.summary.push(("worst_amplitude_error".into(), worst_amp));
    out.summary.push(("worst_phase_error_rad".into(), worst_phase));
    out.reports.push(report);
    out.traces.push(NamedTraces {
        name: "full_field".into(),
        labels: record.labels.clone(),
        traces: record.traces,
    });
    out.traces.push(NamedTraces {
        name: "oracle".into(),
        labels: prep.receivers.labels.clone(),
        traces: oracle_traces,
    });
    Ok(out)
}

/// Location and contrast of the strongest back-projected peak.
pub fn focus_metrics(grid: &Grid, snapshots: &[Snapshot], x0: &Vec3, exclusion: f64) -> Result<FocusMetrics> {
    let mut best: Option<(usize, [usize; 3], f64)> = None;
    for (s, snap) in snapshots.iter().enumerate() {
        for ((i, j, k), v) in snap.p.indexed_iter() {
            let idx = [i, j, k];
            if v.abs() > best.map_or(-1.0, |b| b.2) && grid.in_interior(&grid.position(idx)) {
                best = Some((s, idx, v.abs()));
            }
        }
    }
    let (s, idx, peak) = best.ok_or_else(|| WaveError::Config("no snapshots to search".into()))?;
    let pos = grid.position(idx);
    let mut side = 0.0f64;
    for ((i, j, k), v) in snapshots[s].p.indexed_iter() {
        let x = grid.position([i, j, k]);
        if grid.in_interior(&x) && (v3(x) - v3(pos)).norm() > exclusion {
            side = side.max(v.abs());
        }
    }
    let err = (v3(pos) - x0).norm();
    Ok(FocusMetrics {
        peak_index: idx,
        peak_position: pos,
        peak_value: peak,
        peak_time: snapshots[s].time,
        location_error: err,
        location_error_cells: err / grid.spacings().iter().cloned().fold(0.0, f64::max),
        peak_to_sidelobe: if side > 0.0 { peak / side } else { f64::INFINITY },
    })
}

/// Back-projects a surface record and locates the focus over the final quarter of the run.
pub fn backproject_focus(
    cfg: &ExperimentConfig,
    grid: &Grid,
    medium: &Medium,
    record: &PressureRecord,
    surface: &ApertureMesh,
) -> Result<(Vec<Snapshot>, FocusMetrics)> {
    let n_t = record.n_t;
    let first = (n_t - n_t / 4).max(1);
    let snaps = time_reverse_backproject(
        record,
        surface,
        grid,
        medium,
        cfg.rho0,
        cfg.a_p,
        &solver_config(cfg),
        first,
        cfg.snapshot_every,
    )?;
    let focus = focus_metrics(grid, &snaps, &v3(cfg.source_position), cfg.focus_exclusion_radius)?;
    Ok((snaps, focus))
}

/// Forward point-source run recorded on a closed sphere, then time-reversed back-projection.
pub fn run_time_reversal(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let prep = prepare(cfg)?;
    let mesh = prep.mesh.as_ref().expect("sphere mesh");
    let x0 = v3(cfg.source_position);
    let medium = Medium::homogeneous(&prep.grid, cfg.c, cfg.rho0)?;
    let source = GridSource::mass_volumetric(&prep.grid, &VolumeSource::Point(x0), &prep.pulse, cfg.dt)?;
    let sensors: Vec<Sensor> = mesh.vertices().iter().map(|v| Sensor::Point(*v)).collect();
    let labels: Vec<String> = (1..=mesh.num_vertices()).map(|i| format!("v{i}")).collect();
    let mut solver = Solver::new(&prep.grid, &medium, cfg.dt, &solver_config(cfg))?;
    let record = run_with_observer(&mut solver, &source, &sensors, labels, prep.n_t, |_| {})?;
    let (snaps, focus) = backproject_focus(cfg, &prep.grid, &medium, &record, mesh)?;

    let mut out = RunOutput::new(cfg, &prep);
    out.summary
        .push(("focus_location_error_m".into(), focus.location_error));
    out.summary
        .push(("focus_location_error_cells".into(), focus.location_error_cells));
    out.summary.push(("focus_peak".into(), focus.peak_value));
    out.summary.push(("focus_peak_time_s".into(), focus.peak_time));
    out.summary
        .push(("focus_peak_to_sidelobe".into(), focus.peak_to_sidelobe));
    if let Some(best) = snaps.iter().find(|s| (s.time - focus.peak_time).abs() < 0.5 * cfg.dt) {
        out.snapshots.push(PlaneSnapshot {
            name: "focus".into(),
            time: best.time,
            axis: 2,
            index: focus.peak_index[2],
            spacing: [cfg.spacing; 3],
            field: extract_plane(&best.p, 2, focus.peak_index[2]),
        });
    }
    out.focus = Some(focus);
    out.traces.push(NamedTraces {
        name: "surface".into(),
        labels: record.labels.clone(),
        traces: record.traces,
    });
    Ok(out)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    match cfg.experiment {
        ExperimentKind::PointSource => run_point_source(cfg),
        ExperimentKind::DiscMonopole => run_disc_monopole(cfg),
        ExperimentKind::DiscDipoleMomentum | ExperimentKind::DiscDipoleFarfieldMass => run_disc_dipole(cfg),
        ExperimentKind::TimeReversal => run_time_reversal(cfg),
    }
}

/// Analytic traces (and snapshot plane) only, without a full-field run.
pub fn run_oracle(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let prep = prepare(cfg)?;
    let mut out = RunOutput::new(cfg, &prep);
    let labels = prep.receivers.labels.clone();
    match cfg.experiment {
        ExperimentKind::PointSource => {
            let x0 = v3(cfg.source_position);
            let axis = TimeAxis::new(cfg.dt, prep.n_t);
            let traces = prep
                .receivers
                .positions
                .iter()
                .map(|x| primary_point_pressure(x, &x0, &prep.pulse.series, cfg.c, axis))
                .collect::<Result<Vec<_>>>()?;
            out.traces.push(NamedTraces {
                name: "oracle".into(),
                labels,
                traces,
            });
        }
        ExperimentKind::DiscMonopole => {
            let (traces, plane) = monopole_oracle(cfg, &prep)?;
            out.traces.push(NamedTraces {
                name: "oracle".into(),
                labels,
                traces,
            });
            out.snapshots.push(plane_snapshot("oracle", cfg, &prep, plane));
        }
        ExperimentKind::DiscDipoleMomentum | ExperimentKind::DiscDipoleFarfieldMass => {
            let (traces, plane) = dipole_oracle(cfg, &prep)?;
            out.traces.push(NamedTraces {
                name: "oracle".into(),
                labels,
                traces,
            });
            out.snapshots.push(plane_snapshot("oracle", cfg, &prep, plane));
        }
        ExperimentKind::TimeReversal => {
            return Err(WaveError::Config("time_reversal has no analytic oracle".into()));
        }
    }
    Ok(out)
}
