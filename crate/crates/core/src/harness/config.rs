//! Flat `key = value` experiment configuration with desk/paper presets.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Result, WaveError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    PointSource,
    DiscMonopole,
    DiscDipoleMomentum,
    DiscDipoleFarfieldMass,
    TimeReversal,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::PointSource,
        ExperimentKind::DiscMonopole,
        ExperimentKind::DiscDipoleMomentum,
        ExperimentKind::DiscDipoleFarfieldMass,
        ExperimentKind::TimeReversal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::PointSource => "point_source",
            ExperimentKind::DiscMonopole => "disc_monopole",
            ExperimentKind::DiscDipoleMomentum => "disc_dipole_momentum",
            ExperimentKind::DiscDipoleFarfieldMass => "disc_dipole_farfield_mass",
            ExperimentKind::TimeReversal => "time_reversal",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s.trim())
    }

    pub fn is_disc(self) -> bool {
        matches!(
            self,
            ExperimentKind::DiscMonopole | ExperimentKind::DiscDipoleMomentum | ExperimentKind::DiscDipoleFarfieldMass
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Desk,
    Paper,
}

impl Scale {
    pub fn name(self) -> &'static str {
        match self {
            Scale::Desk => "desk",
            Scale::Paper => "paper",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "desk" => Some(Scale::Desk),
            "paper" => Some(Scale::Paper),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PulseSpec {
    /// Hann-windowed tone burst.
    Burst {
        center_hz: f64,
        cycles: f64,
        amplitude: f64,
    },
    /// Two-column pulse file whose header names the quantity.
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub scale: Scale,

    pub grid_min: [f64; 3],
    pub grid_max: [f64; 3],
    pub spacing: f64,
    pub pml_thickness: usize,
    /// alpha_max = pml_alpha * c / spacing
    pub pml_alpha: f64,

    pub c: f64,
    pub rho0: f64,
    pub dt: f64,
    /// None: derived from the geometry and pulse length.
    pub n_t: Option<usize>,
    pub kspace_correction: bool,

    pub pulse: PulseSpec,
    /// Builtin pulses are sampled at dt / pulse_oversampling.
    pub pulse_oversampling: usize,
    pub a_p: f64,

    pub source_position: [f64; 3],

    pub disc_radius: f64,
    pub disc_center: [f64; 3],
    pub disc_normal: [f64; 3],
    pub mesh_max_edge: f64,
    pub receiver_radii: Vec<f64>,
    pub receiver_phis: Vec<f64>,
    pub receiver_thetas: Vec<f64>,

    pub hemisphere_radius: f64,
    pub hemisphere_center: [f64; 3],
    pub hemisphere_pole: [f64; 3],
    pub hemisphere_count: usize,
    pub analysis_frequencies: usize,
    pub analysis_max_fraction: f64,
    pub analysis_min_distance: f64,

    pub sphere_radius: f64,
    pub sphere_center: [f64; 3],
    pub sphere_max_edge: f64,
    pub snapshot_every: usize,
    pub focus_exclusion_radius: f64,

    pub snapshot_axis: usize,
    pub snapshot_position: f64,
    pub snapshot_time: f64,

    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn preset(experiment: ExperimentKind, scale: Scale) -> Self {
        let desk = scale == Scale::Desk;
        let mut cfg = ExperimentConfig {
            experiment,
            scale,
            grid_min: [-0.048; 3],
            grid_max: [0.047; 3],
            spacing: 1e-3,
            pml_thickness: 10,
            pml_alpha: 2.0,
            c: 1540.0,
            rho0: 1000.0,
            dt: 8e-8,
            n_t: None,
            kspace_correction: true,
            pulse: PulseSpec::Burst {
                center_hz: 0.5e6,
                cycles: 3.0,
                amplitude: 1.0,
            },
            pulse_oversampling: 4,
            a_p: 2.0,
            source_position: [0.0, 0.0, -0.016],
            disc_radius: 8e-3,
            disc_center: [0.0, 0.0, -0.016],
            disc_normal: [0.0, 0.0, 1.0],
            mesh_max_edge: 2.5e-4,
            receiver_radii: vec![0.045, 0.03, 0.02],
            receiver_phis: vec![0.0, PI / 6.0, PI / 4.0, PI / 3.0],
            receiver_thetas: vec![PI / 4.0, 3.0 * PI / 4.0, 5.0 * PI / 4.0, 7.0 * PI / 4.0],
            hemisphere_radius: 0.032,
            hemisphere_center: [0.0, 0.0, 0.016],
            hemisphere_pole: [0.0, 0.0, -1.0],
            hemisphere_count: 39,
            analysis_frequencies: 50,
            analysis_max_fraction: 0.5,
            analysis_min_distance: 0.02,
            sphere_radius: 0.014,
            sphere_center: [0.0; 3],
            sphere_max_edge: 4e-3,
            snapshot_every: 2,
            focus_exclusion_radius: 5e-3,
            snapshot_axis: 0,
            snapshot_position: 0.021,
            snapshot_time: 30e-6,
            output_dir: None,
        };
        if !desk {
            cfg.grid_min = [-0.0714, -0.0714, -0.0714];
            cfg.grid_max = [0.0711, 0.0711, 0.0046];
            cfg.spacing = 5e-4;
            // the aperture sits 4.6 mm below the top face, so the layer must stay thin
            cfg.pml_thickness = 6;
            cfg.dt = 4e-8;
            cfg.pulse = PulseSpec::Burst {
                center_hz: 1e6,
                cycles: 3.0,
                amplitude: 1.0,
            };
            cfg.disc_center = [0.0; 3];
            cfg.disc_normal = [0.0, 0.0, -1.0];
            cfg.mesh_max_edge = 1.25e-4;
            cfg.receiver_radii = vec![0.065, 0.05, 0.035, 0.02];
            cfg.hemisphere_radius = 0.056;
            cfg.hemisphere_center = [0.0; 3];
            cfg.source_position = [0.0, 0.0, -0.056];
            cfg.snapshot_position = 0.031;
            cfg.snapshot_time = 45e-6;
        }
        if experiment == ExperimentKind::PointSource {
            // short and low so the spectrum has no nulls inside the analysis band
            let f0 = if desk { 0.25e6 } else { 0.5e6 };
            cfg.pulse = PulseSpec::Burst {
                center_hz: f0,
                cycles: 1.5,
                amplitude: 1.0,
            };
        }
        if experiment == ExperimentKind::TimeReversal {
            cfg.grid_min = [-0.024; 3];
            cfg.grid_max = [0.023; 3];
            cfg.pml_thickness = 8;
            cfg.pulse = PulseSpec::Burst {
                center_hz: 0.3e6,
                cycles: 3.0,
                amplitude: 1.0,
            };
            cfg.source_position = [0.0013, -0.0022, 0.0007];
            if !desk {
                cfg.grid_max = [0.0235; 3];
                cfg.pml_thickness = 12;
                cfg.pulse = PulseSpec::Burst {
                    center_hz: 0.6e6,
                    cycles: 3.0,
                    amplitude: 1.0,
                };
                cfg.sphere_max_edge = 2e-3;
                cfg.focus_exclusion_radius = 2.5e-3;
            }
        }
        cfg
    }

    /// Parses a config: `experiment` and `scale` pick the preset, every other key overrides it.
    /// `scale` (when given) wins over the file's own `scale` key.
    pub fn from_text(text: &str, scale: Option<Scale>) -> Result<Self> {
        let pairs = parse_pairs(text)?;
        let lookup = |key: &str| pairs.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let experiment = lookup("experiment").ok_or_else(|| WaveError::Config("missing key 'experiment'".into()))?;
        let experiment = ExperimentKind::parse(experiment)
            .ok_or_else(|| WaveError::Config(format!("unknown experiment '{experiment}'")))?;
        let scale = match (scale, lookup("scale")) {
            (Some(s), _) => s,
            (None, Some(v)) => Scale::parse(v).ok_or_else(|| WaveError::Config(format!("unknown scale '{v}'")))?,
            (None, None) => Scale::Desk,
        };
        let mut cfg = Self::preset(experiment, scale);
        for (key, value) in &pairs {
            if key == "experiment" || key == "scale" {
                continue;
            }
            cfg.set(key, value)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path, scale: Option<Scale>) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| WaveError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_text(&text, scale)?;
        // relative pulse paths are taken from the config's directory
        if let PulseSpec::File(p) = &cfg.pulse {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.pulse = PulseSpec::File(dir.join(p));
                }
            }
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| WaveError::Config(format!("key '{key}': {what} '{value}'"));
        let num = || parse_number(value).ok_or_else(|| bad("not a number"));
        let count = || value.trim().parse::<usize>().map_err(|_| bad("not a count"));
        let vec3 = || {
            let v = parse_list(value).ok_or_else(|| bad("not a number list"))?;
            <[f64; 3]>::try_from(v).map_err(|_| bad("expected three numbers"))
        };
        let list = || parse_list(value).ok_or_else(|| bad("not a number list"));
        let flag = || match value.trim() {
            "true" | "on" | "yes" | "1" => Ok(true),
            "false" | "off" | "no" | "0" => Ok(false),
            _ => Err(bad("not a boolean")),
        };
        match key {
            "grid_min" => self.grid_min = vec3()?,
            "grid_max" => self.grid_max = vec3()?,
            "spacing" => self.spacing = num()?,
            "pml_thickness" => self.pml_thickness = count()?,
            "pml_alpha" => self.pml_alpha = num()?,
            "c" => self.c = num()?,
            "rho0" => self.rho0 = num()?,
            "dt" => self.dt = num()?,
            "n_t" => {
                self.n_t = match value.trim() {
                    "auto" => None,
                    _ => Some(count()?),
                }
            }
            "kspace_correction" => self.kspace_correction = flag()?,
            "pulse" => {
                self.pulse = match value.trim() {
                    "burst" => match self.pulse {
                        PulseSpec::Burst { .. } => self.pulse.clone(),
                        PulseSpec::File(_) => PulseSpec::Burst {
                            center_hz: 0.5e6,
                            cycles: 3.0,
                            amplitude: 1.0,
                        },
                    },
                    path => PulseSpec::File(PathBuf::from(path)),
                }
            }
            "pulse_center_hz" | "pulse_cycles" | "pulse_amplitude" => {
                let v = num()?;
                let PulseSpec::Burst {
                    center_hz,
                    cycles,
                    amplitude,
                } = &mut self.pulse
                else {
                    return Err(WaveError::Config(format!("key '{key}' needs the builtin burst pulse")));
                };
                match key {
                    "pulse_center_hz" => *center_hz = v,
                    "pulse_cycles" => *cycles = v,
                    _ => *amplitude = v,
                }
            }
            "pulse_oversampling" => self.pulse_oversampling = count()?,
            "a_p" => self.a_p = num()?,
            "source_position" => self.source_position = vec3()?,
            "disc_radius" => self.disc_radius = num()?,
            "disc_center" => self.disc_center = vec3()?,
            "disc_normal" => self.disc_normal = vec3()?,
            "mesh_max_edge" => self.mesh_max_edge = num()?,
            "receiver_radii" => self.receiver_radii = list()?,
            "receiver_phis" => self.receiver_phis = list()?,
            "receiver_thetas" => self.receiver_thetas = list()?,
            "hemisphere_radius" => self.hemisphere_radius = num()?,
            "hemisphere_center" => self.hemisphere_center = vec3()?,
            "hemisphere_pole" => self.hemisphere_pole = vec3()?,
            "hemisphere_count" => self.hemisphere_count = count()?,
            "analysis_frequencies" => self.analysis_frequencies = count()?,
            "analysis_max_fraction" => self.analysis_max_fraction = num()?,
            "analysis_min_distance" => self.analysis_min_distance = num()?,
            "sphere_radius" => self.sphere_radius = num()?,
            "sphere_center" => self.sphere_center = vec3()?,
            "sphere_max_edge" => self.sphere_max_edge = num()?,
            "snapshot_every" => self.snapshot_every = count()?,
            "focus_exclusion_radius" => self.focus_exclusion_radius = num()?,
            "snapshot_axis" => self.snapshot_axis = count()?,
            "snapshot_position" => self.snapshot_position = num()?,
            "snapshot_time" => self.snapshot_time = num()?,
            "output_dir" => self.output_dir = Some(PathBuf::from(value.trim())),
            _ => return Err(WaveError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Every resolved value, in a form `from_text` reads back.
    pub fn to_text(&self) -> String {
        let v3 = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("experiment", self.experiment.name().into());
        kv("scale", self.scale.name().into());
        kv("grid_min", v3(&self.grid_min));
        kv("grid_max", v3(&self.grid_max));
        kv("spacing", format!("{:e}", self.spacing));
        kv("pml_thickness", self.pml_thickness.to_string());
        kv("pml_alpha", format!("{:e}", self.pml_alpha));
        kv("c", format!("{:e}", self.c));
        kv("rho0", format!("{:e}", self.rho0));
        kv("dt", format!("{:e}", self.dt));
        kv("n_t", self.n_t.map_or("auto".into(), |n| n.to_string()));
        kv("kspace_correction", self.kspace_correction.to_string());
        match &self.pulse {
            PulseSpec::Burst {
                center_hz,
                cycles,
                amplitude,
            } => {
                kv("pulse", "burst".into());
                kv("pulse_center_hz", format!("{center_hz:e}"));
                kv("pulse_cycles", format!("{cycles:e}"));
                kv("pulse_amplitude", format!("{amplitude:e}"));
            }
            PulseSpec::File(p) => kv("pulse", p.display().to_string()),
        }
        kv("pulse_oversampling", self.pulse_oversampling.to_string());
        kv("a_p", format!("{:e}", self.a_p));
        kv("source_position", v3(&self.source_position));
        kv("disc_radius", format!("{:e}", self.disc_radius));
        kv("disc_center", v3(&self.disc_center));
        kv("disc_normal", v3(&self.disc_normal));
        kv("mesh_max_edge", format!("{:e}", self.mesh_max_edge));
        kv("receiver_radii", v3(&self.receiver_radii));
        kv("receiver_phis", v3(&self.receiver_phis));
        kv("receiver_thetas", v3(&self.receiver_thetas));
        kv("hemisphere_radius", format!("{:e}", self.hemisphere_radius));
        kv("hemisphere_center", v3(&self.hemisphere_center));
        kv("hemisphere_pole", v3(&self.hemisphere_pole));
        kv("hemisphere_count", self.hemisphere_count.to_string());
        kv("analysis_frequencies", self.analysis_frequencies.to_string());
        kv("analysis_max_fraction", format!("{:e}", self.analysis_max_fraction));
        kv("analysis_min_distance", format!("{:e}", self.analysis_min_distance));
        kv("sphere_radius", format!("{:e}", self.sphere_radius));
        kv("sphere_center", v3(&self.sphere_center));
        kv("sphere_max_edge", format!("{:e}", self.sphere_max_edge));
        kv("snapshot_every", self.snapshot_every.to_string());
        kv("focus_exclusion_radius", format!("{:e}", self.focus_exclusion_radius));
        kv("snapshot_axis", self.snapshot_axis.to_string());
        kv("snapshot_position", format!("{:e}", self.snapshot_position));
        kv("snapshot_time", format!("{:e}", self.snapshot_time));
        if let Some(d) = &self.output_dir {
            kv("output_dir", d.display().to_string());
        }
        s
    }
}

fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| WaveError::Config(format!("line {}: expected 'key = value', got '{line}'", no + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Numbers, `pi`, and products/quotients of them ("3*pi/4", "pi/6", "1e-3").
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, s),
    };
    let atom = |t: &str| match t.trim() {
        "pi" => Some(PI),
        t => t.parse::<f64>().ok(),
    };
    // split on '*' and '/' while keeping exponents like 1e-3 intact
    let mut value = None;
    let mut op = '*';
    let mut start = 0;
    let bytes: Vec<char> = body.chars().collect();
    for i in 0..=bytes.len() {
        if i == bytes.len() || bytes[i] == '*' || bytes[i] == '/' {
            let tok: String = bytes[start..i].iter().collect();
            let a = atom(&tok)?;
            value = Some(match (value, op) {
                (None, _) => a,
                (Some(v), '*') => v * a,
                (Some(v), _) => v / a,
            });
            if i < bytes.len() {
                op = bytes[i];
            }
            start = i + 1;
        }
    }
    value.map(|v| sign * v)
}

fn parse_list(s: &str) -> Option<Vec<f64>> {
    s.split(',').map(parse_number).collect()
}
