// Copyright 2026 The magicarp Authors
// SPDX-License-Identifier: Apache-2.0

//! Text formats for schedules, benchmark records and trajectories.
//!
//! Floats are written with 17 significant digits so every value reads back
//! bit-identical.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::bench::BenchmarkRecord;
use crate::error::{Error, Result};
use crate::propagation::PulseSchedule;
use crate::qudit::AdjointMatrix;

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        // matches what f64::from_str accepts
        format!("{x}")
    }
}

fn parse_f64(field: &str, line: usize, column: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| {
        Error::Format(format!(
            "line {line}: bad number {field:?} in column {column}"
        ))
    })
}

fn schedule_header(n_controls: usize) -> Vec<String> {
    let mut h = vec!["step".to_string(), "t".to_string()];
    h.extend((0..n_controls).map(|k| format!("u_{k}")));
    h.push("envelope".into());
    h
}

pub fn write_schedule_csv<W: Write>(schedule: &PulseSchedule, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(schedule_header(schedule.n_controls()))?;
    let dt = schedule.dt();
    let env = schedule.envelope();
    for (n, amps) in schedule.rows().enumerate() {
        let mut rec = vec![n.to_string(), fmt_f64(n as f64 * dt)];
        rec.extend(amps.iter().map(|&u| fmt_f64(u)));
        rec.push(fmt_f64(env[n]));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the `u_k` columns; `step`, `t` and `envelope` are checked for shape only.
pub fn read_schedule_csv<R: Read>(input: R) -> Result<PulseSchedule> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if header.len() < 4 {
        return Err(Error::Format(format!(
            "schedule header needs step, t, at least one u_k and envelope; got {header:?}"
        )));
    }
    let k = header.len() - 3;
    if header != schedule_header(k) {
        return Err(Error::Format(format!(
            "unexpected schedule header {header:?}"
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let step: usize = rec[0]
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("line {line}: bad step index {:?}", &rec[0])))?;
        if step != i {
            return Err(Error::Format(format!(
                "line {line}: expected step {i}, found {step}"
            )));
        }
        parse_f64(&rec[1], line, "t")?;
        let amps = (0..k)
            .map(|j| parse_f64(&rec[2 + j], line, &header[2 + j]))
            .collect::<Result<Vec<_>>>()?;
        parse_f64(&rec[k + 2], line, "envelope")?;
        rows.push(amps);
    }
    if rows.is_empty() {
        return Err(Error::Format("schedule has no steps".into()));
    }
    PulseSchedule::from_rows(k, rows)
}

pub fn write_records_csv<W: Write>(records: &[BenchmarkRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "dim",
        "run_index",
        "seed",
        "infidelity",
        "duration_omega",
        "duration_qsl",
        "iterations",
        "converged",
    ])?;
    for r in records {
        w.write_record([
            r.dim.to_string(),
            r.run_index.to_string(),
            r.seed.to_string(),
            fmt_f64(r.infidelity),
            fmt_f64(r.duration_omega),
            fmt_f64(r.duration_qsl),
            r.iterations.to_string(),
            r.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<BenchmarkRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

/// Two-column gnuplot data: `duration_qsl infidelity`, finished runs only.
pub fn write_scatter<W: Write>(records: &[BenchmarkRecord], dim: usize, mut out: W) -> Result<()> {
    writeln!(out, "# dim {dim}")?;
    writeln!(out, "# duration_qsl infidelity")?;
    for r in records.iter().filter(|r| r.dim == dim) {
        if r.duration_qsl.is_finite() && r.infidelity.is_finite() {
            writeln!(out, "{} {}", fmt_f64(r.duration_qsl), fmt_f64(r.infidelity))?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_bloch_csv<W: Write>(rows: &[[f64; 4]], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "x", "y", "z"])?;
    for row in rows {
        w.write_record(row.iter().map(|&v| fmt_f64(v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn adjoint_to_json(g: &AdjointMatrix) -> Result<String> {
    let mut s = serde_json::to_string_pretty(g)?;
    s.push('\n');
    Ok(s)
}

pub fn adjoint_from_json(s: &str) -> Result<AdjointMatrix> {
    let g: AdjointMatrix = serde_json::from_str(s)?;
    // re-run the constructor checks
    AdjointMatrix::new(g.dim, g.coeffs)
}

/// Creates (truncating) `path` and hands a buffered writer to `f`.
pub fn write_file<P, F>(path: P, f: F) -> Result<()>
where
    P: AsRef<Path>,
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}
