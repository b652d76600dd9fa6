//! Uniformly sampled signals and source pulses.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Result, WaveError};

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub dt: f64,
    pub t0: f64,
    pub values: Vec<f64>,
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// Half-width of the windowed-sinc interpolator (8 taps in total).
const SINC_HALF_TAPS: i64 = 4;

// (sin, cos) of πk/4 for the taps k = -3..=4
const LANCZOS_ROTATIONS: [(f64, f64); 8] = {
    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;
    [
        (-H, -H),
        (-1.0, 0.0),
        (-H, H),
        (0.0, 1.0),
        (H, H),
        (1.0, 0.0),
        (H, -H),
        (0.0, -1.0),
    ]
};

impl TimeSeries {
    pub fn new(dt: f64, t0: f64, values: Vec<f64>) -> Self {
        TimeSeries { dt, t0, values }
    }

    pub fn zeros(dt: f64, t0: f64, n: usize) -> Self {
        TimeSeries {
            dt,
            t0,
            values: vec![0.0; n],
        }
    }

    pub fn from_fn(dt: f64, t0: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        TimeSeries {
            dt,
            t0,
            values: (0..n).map(|i| f(t0 + i as f64 * dt)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }

    fn at(&self, i: i64) -> f64 {
        if i < 0 {
            0.0
        } else {
            self.values.get(i as usize).copied().unwrap_or(0.0)
        }
    }

    /// Linear interpolation; zero outside the sampled support.
    pub fn sample_linear(&self, t: f64) -> f64 {
        let x = (t - self.t0) / self.dt;
        let i = x.floor();
        let frac = x - i;
        let i = i as i64;
        if frac < 1e-9 {
            return self.at(i);
        }
        if frac > 1.0 - 1e-9 {
            return self.at(i + 1);
        }
        self.at(i) * (1.0 - frac) + self.at(i + 1) * frac
    }

    /// 8-tap Lanczos-windowed sinc interpolation; exact at sample instants.
    pub fn sample_sinc(&self, t: f64) -> f64 {
        let x = (t - self.t0) / self.dt;
        let base = x.floor() as i64;
        let frac = x - base as f64;
        if frac < 1e-12 {
            return self.at(base);
        }
        if frac > 1.0 - 1e-12 {
            return self.at(base + 1);
        }
        // tap k sits at d = frac - k; both sines follow from sin/cos of frac by
        // angle addition, since the taps step by π and π/4 respectively
        let a = SINC_HALF_TAPS as f64;
        let s1 = (PI * frac).sin();
        let (sa, ca) = (PI * frac / a).sin_cos();
        let mut acc = 0.0;
        for (k, (sk, ck)) in (1 - SINC_HALF_TAPS..=SINC_HALF_TAPS).zip(LANCZOS_ROTATIONS) {
            let v = self.at(base + k);
            if v == 0.0 {
                continue;
            }
            let d = frac - k as f64;
            let sin_pd = if k % 2 == 0 { s1 } else { -s1 };
            let sin_pda = sa * ck - ca * sk;
            acc += v * sin_pd * sin_pda * a / (PI * PI * d * d);
        }
        acc
    }

    /// out[i] += scale * self(out_t0 + i out_dt - delay), sinc-interpolated.
    /// When the sampling grids match, the 8 taps are computed once.
    pub fn add_delayed(&self, out: &mut [f64], out_t0: f64, out_dt: f64, delay: f64, scale: f64) {
        if (out_dt - self.dt).abs() > 1e-12 * self.dt {
            // only output samples within reach of the taps can be nonzero
            let reach = SINC_HALF_TAPS as f64 * self.dt;
            let lo = ((self.t0 - reach + delay - out_t0) / out_dt).floor().max(0.0) as usize;
            let hi = (((self.t_end() + reach + delay - out_t0) / out_dt).ceil() + 1.0).max(0.0) as usize;
            for i in lo.min(out.len())..hi.min(out.len()) {
                out[i] += scale * self.sample_sinc(out_t0 + i as f64 * out_dt - delay);
            }
            return;
        }
        let s = (delay + self.t0 - out_t0) / self.dt;
        let m = s.floor();
        let frac_s = s - m;
        let m = m as i64;
        if !(1e-12..=1.0 - 1e-12).contains(&frac_s) {
            let shift = if frac_s < 0.5 { m } else { m + 1 };
            for (i, o) in out.iter_mut().enumerate() {
                *o += scale * self.at(i as i64 - shift);
            }
            return;
        }
        // sample i sits at fractional position (i - m - 1) + (1 - frac_s)
        let frac = 1.0 - frac_s;
        let a = SINC_HALF_TAPS as f64;
        let taps: Vec<(i64, f64)> = (1 - SINC_HALF_TAPS..=SINC_HALF_TAPS)
            .map(|j| {
                let d = frac - j as f64;
                (j, sinc(d) * sinc(d / a))
            })
            .collect();
        let n = self.len() as i64;
        for (i, o) in out.iter_mut().enumerate() {
            let base = i as i64 - m - 1;
            if base + SINC_HALF_TAPS < 0 {
                continue;
            }
            if base - SINC_HALF_TAPS >= n {
                break;
            }
            let acc: f64 = taps.iter().map(|(j, w)| w * self.at(base + j)).sum();
            *o += scale * acc;
        }
    }

    /// Centered finite difference, treating samples outside the record as zero.
    pub fn derivative(&self) -> TimeSeries {
        let n = self.len() as i64;
        let values = (0..n)
            .map(|i| (self.at(i + 1) - self.at(i - 1)) / (2.0 * self.dt))
            .collect();
        TimeSeries {
            dt: self.dt,
            t0: self.t0,
            values,
        }
    }

    pub fn scaled(&self, a: f64) -> TimeSeries {
        TimeSeries {
            dt: self.dt,
            t0: self.t0,
            values: self.values.iter().map(|v| v * a).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Index of the largest |value|.
    pub fn argmax_abs(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if v.abs() > self.values[best].abs() {
                best = i;
            }
        }
        best
    }
}

/// Physical meaning of a driving pulse.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuantityTag {
    /// Radiation source term s.
    Source,
    /// Normal particle velocity u^n on a surface.
    NormalVelocity,
    /// Surface pressure p.
    Pressure,
}

impl QuantityTag {
    pub fn name(self) -> &'static str {
        match self {
            QuantityTag::Source => "s",
            QuantityTag::NormalVelocity => "un",
            QuantityTag::Pressure => "p",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "s" | "source" => Some(QuantityTag::Source),
            "un" | "u^n" | "u" | "velocity" => Some(QuantityTag::NormalVelocity),
            "p" | "pressure" => Some(QuantityTag::Pressure),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourcePulse {
    pub tag: QuantityTag,
    pub series: TimeSeries,
}

impl SourcePulse {
    pub fn new(tag: QuantityTag, series: TimeSeries) -> Result<Self> {
        if series.is_empty() {
            return Err(WaveError::InvalidPulse("empty pulse".into()));
        }
        if !(series.dt > 0.0) {
            return Err(WaveError::InvalidPulse(format!(
                "sample interval {} not positive",
                series.dt
            )));
        }
        if series.t0 < 0.0 {
            return Err(WaveError::InvalidPulse("pulse starts before t = 0".into()));
        }
        Ok(SourcePulse { tag, series })
    }

    pub fn expect(&self, tag: QuantityTag) -> Result<()> {
        if self.tag != tag {
            return Err(WaveError::QuantityMismatch {
                expected: tag.name(),
                found: self.tag.name(),
            });
        }
        Ok(())
    }

    pub fn value(&self, t: f64) -> f64 {
        self.series.sample_linear(t)
    }

    pub fn scaled(&self, a: f64) -> SourcePulse {
        SourcePulse {
            tag: self.tag,
            series: self.series.scaled(a),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("time_s {}\n", self.tag.name());
        for (i, v) in self.series.values.iter().enumerate() {
            let _ = writeln!(s, "{:.12e} {:.12e}", self.series.time(i), v);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let ctx = "pulse";
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| WaveError::parse(ctx, "missing header"))?;
        let tag = header
            .split(|c: char| c.is_whitespace() || c == ',')
            .rfind(|t| !t.is_empty())
            .and_then(QuantityTag::parse)
            .ok_or_else(|| WaveError::parse(ctx, format!("header '{header}' names no quantity (s, un, p)")))?;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for line in lines {
            let cols: Vec<&str> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .collect();
            let parse = |t: &str| {
                t.parse::<f64>()
                    .map_err(|_| WaveError::parse(ctx, format!("bad line '{line}'")))
            };
            if cols.len() != 2 {
                return Err(WaveError::parse(ctx, format!("expected two columns: '{line}'")));
            }
            times.push(parse(cols[0])?);
            values.push(parse(cols[1])?);
        }
        if times.len() < 2 {
            return Err(WaveError::InvalidPulse("need at least two samples".into()));
        }
        let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
        for (i, t) in times.iter().enumerate() {
            if (t - (times[0] + i as f64 * dt)).abs() > 1e-6 * dt {
                return Err(WaveError::InvalidPulse("samples are not uniformly spaced".into()));
            }
        }
        SourcePulse::new(tag, TimeSeries::new(dt, times[0], values))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Hann-windowed sine burst of `cycles` periods at `center_hz`, starting at t = 0.
pub fn tone_burst(center_hz: f64, cycles: f64, amplitude: f64, dt: f64) -> TimeSeries {
    let duration = cycles / center_hz;
    let n = (duration / dt).ceil() as usize + 1;
    TimeSeries::from_fn(dt, 0.0, n, |t| {
        if t > duration {
            return 0.0;
        }
        let window = 0.5 * (1.0 - (2.0 * PI * t / duration).cos());
        amplitude * window * (2.0 * PI * center_hz * t).sin()
    })
}
