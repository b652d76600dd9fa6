use std::fmt::Write as _;

use crate::error::{Result, WaveError};
use crate::grid::Field;
use crate::signal::TimeSeries;

/// Stated with every report because the comparison metric is this crate's choice.
pub const RE_DEFINITION: &str = "RE = 100 * ||approx - reference||_2 / ||reference||_2";

/// 100 ‖a − b‖₂ / ‖b‖₂.
pub fn relative_error(approx: &[f64], reference: &[f64]) -> Result<f64> {
    if approx.len() != reference.len() {
        return Err(WaveError::ShapeMismatch {
            expected: vec![reference.len()],
            found: vec![approx.len()],
        });
    }
    let norm = reference.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(WaveError::ZeroReference);
    }
    let diff = approx
        .iter()
        .zip(reference)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(100.0 * diff / norm)
}

pub fn relative_error_series(approx: &TimeSeries, reference: &TimeSeries) -> Result<f64> {
    if (approx.dt - reference.dt).abs() > 1e-9 * reference.dt || (approx.t0 - reference.t0).abs() > 1e-9 * reference.dt
    {
        return Err(WaveError::Config("traces are sampled differently".into()));
    }
    relative_error(&approx.values, &reference.values)
}

pub fn relative_error_field(approx: &Field, reference: &Field) -> Result<f64> {
    if approx.shape() != reference.shape() {
        return Err(WaveError::ShapeMismatch {
            expected: reference.shape().to_vec(),
            found: approx.shape().to_vec(),
        });
    }
    relative_error(
        approx.as_slice().expect("contiguous"),
        reference.as_slice().expect("contiguous"),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReceiverError {
    pub label: String,
    pub r: f64,
    pub phi: f64,
    pub theta: f64,
    pub re: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotError {
    pub label: String,
    pub time: f64,
    pub re: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub experiment: String,
    /// Which full-field variant was compared (e.g. "momentum").
    pub variant: String,
    pub scale: String,
    pub grid: String,
    pub receivers: Vec<ReceiverError>,
    pub snapshots: Vec<SnapshotError>,
}

impl ErrorReport {
    /// CSV "receiver,r_m,phi_rad,theta_rad,re_percent".
    pub fn to_csv(&self) -> String {
        let mut s = String::from("receiver,r_m,phi_rad,theta_rad,re_percent\n");
        for r in &self.receivers {
            let _ = writeln!(s, "{},{:.9e},{:.9e},{:.9e},{:.9e}", r.label, r.r, r.phi, r.theta, r.re);
        }
        s
    }

    pub fn snapshots_csv(&self) -> String {
        let mut s = String::from("snapshot,time_s,re_percent\n");
        for r in &self.snapshots {
            let _ = writeln!(s, "{},{:.9e},{:.9e}", r.label, r.time, r.re);
        }
        s
    }

    pub fn max_re(&self) -> f64 {
        self.receivers.iter().map(|r| r.re).fold(0.0, f64::max)
    }

    /// Largest max−min RE within any group of receivers sharing (r, phi).
    pub fn theta_group_spread(&self) -> f64 {
        let mut groups: Vec<((f64, f64), Vec<f64>)> = Vec::new();
        for r in &self.receivers {
            match groups
                .iter_mut()
                .find(|((gr, gp), _)| (gr - r.r).abs() < 1e-12 && (gp - r.phi).abs() < 1e-12)
            {
                Some((_, v)) => v.push(r.re),
                None => groups.push(((r.r, r.phi), vec![r.re])),
            }
        }
        groups
            .iter()
            .map(|(_, v)| {
                v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }
}
