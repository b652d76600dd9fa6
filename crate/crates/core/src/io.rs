//! Trace, snapshot and spectrum files.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Result, WaveError};
use crate::grid::Field;
use crate::oracle::ComplexSpectrum;
use crate::signal::TimeSeries;

/// CSV with header "time_s,<labels…>", one row per sample, 12 significant digits.
pub fn traces_to_csv(labels: &[String], traces: &[TimeSeries]) -> Result<String> {
    if labels.len() != traces.len() {
        return Err(WaveError::ShapeMismatch {
            expected: vec![labels.len()],
            found: vec![traces.len()],
        });
    }
    let n = traces.first().map_or(0, TimeSeries::len);
    if traces.iter().any(|t| t.len() != n) {
        return Err(WaveError::Config("traces must share one length".into()));
    }
    let mut s = String::from("time_s");
    for l in labels {
        s.push(',');
        s.push_str(l);
    }
    s.push('\n');
    for i in 0..n {
        let _ = write!(s, "{:.11e}", traces[0].time(i));
        for t in traces {
            let _ = write!(s, ",{:.11e}", t.values[i]);
        }
        s.push('\n');
    }
    Ok(s)
}

pub fn write_traces_csv(path: &Path, labels: &[String], traces: &[TimeSeries]) -> Result<()> {
    std::fs::write(path, traces_to_csv(labels, traces)?)?;
    Ok(())
}

pub fn read_traces_csv(path: &Path) -> Result<(Vec<String>, Vec<TimeSeries>)> {
    let ctx = "traces";
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| WaveError::parse(ctx, "empty file"))?;
    let labels: Vec<String> = header.split(',').skip(1).map(str::to_string).collect();
    let mut times = Vec::new();
    let mut cols = vec![Vec::new(); labels.len()];
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let vals = line
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| WaveError::parse(ctx, format!("bad row '{line}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != labels.len() + 1 {
            return Err(WaveError::parse(
                ctx,
                format!("row has {} columns, expected {}", vals.len(), labels.len() + 1),
            ));
        }
        times.push(vals[0]);
        for (c, v) in cols.iter_mut().zip(&vals[1..]) {
            c.push(*v);
        }
    }
    let dt = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
    let t0 = times.first().copied().unwrap_or(0.0);
    Ok((labels, cols.into_iter().map(|v| TimeSeries::new(dt, t0, v)).collect()))
}

/// ASCII header "N1 N2 N3 dx1 dx2 dx3 t" then little-endian f64 in row-major (last axis fastest) order.
pub fn write_snapshot(w: &mut impl Write, field: &Field, spacing: [f64; 3], t: f64) -> Result<()> {
    let s = field.shape();
    writeln!(
        w,
        "{} {} {} {:e} {:e} {:e} {:e}",
        s[0], s[1], s[2], spacing[0], spacing[1], spacing[2], t
    )?;
    let mut buf = Vec::with_capacity(field.len() * 8);
    for v in field.iter() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn save_snapshot(path: &Path, field: &Field, spacing: [f64; 3], t: f64) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_snapshot(&mut f, field, spacing, t)?;
    f.flush()?;
    Ok(())
}

pub fn read_snapshot(r: impl Read) -> Result<(Field, [f64; 3], f64)> {
    let ctx = "snapshot";
    let mut r = BufReader::new(r);
    let mut header = String::new();
    r.read_line(&mut header)?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    if tok.len() != 7 {
        return Err(WaveError::parse(
            ctx,
            format!("header '{}' needs 7 fields", header.trim()),
        ));
    }
    let n = |i: usize| {
        tok[i]
            .parse::<usize>()
            .map_err(|_| WaveError::parse(ctx, "bad point count"))
    };
    let x = |i: usize| tok[i].parse::<f64>().map_err(|_| WaveError::parse(ctx, "bad number"));
    let shape = [n(0)?, n(1)?, n(2)?];
    let spacing = [x(3)?, x(4)?, x(5)?];
    let t = x(6)?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let len = shape.iter().product::<usize>();
    if bytes.len() != len * 8 {
        return Err(WaveError::parse(
            ctx,
            format!("expected {} bytes of data, found {}", len * 8, bytes.len()),
        ));
    }
    let data: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let field = Field::from_shape_vec(shape, data).map_err(|e| WaveError::parse(ctx, e.to_string()))?;
    Ok((field, spacing, t))
}

pub fn load_snapshot(path: &Path) -> Result<(Field, [f64; 3], f64)> {
    read_snapshot(std::fs::File::open(path)?)
}

/// CSV "frequency_hz,real,imag,abs,phase_rad".
pub fn spectrum_to_csv(s: &ComplexSpectrum) -> String {
    let mut out = String::from("frequency_hz,real,imag,abs,phase_rad\n");
    for (f, v) in s.frequencies.iter().zip(&s.values) {
        let _ = writeln!(
            out,
            "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}",
            f,
            v.re,
            v.im,
            v.norm(),
            v.arg()
        );
    }
    out
}
