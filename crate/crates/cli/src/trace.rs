//! JSON-lines traces: a header line, one line per iteration record, and a
//! closing status line.

use crate::fmt_real;
use crate::params::ParamsEcho;
use gradsamp::{IterationRecord, RunTrace, TerminationStatus};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    #[serde(rename = "fn")]
    pub function: String,
    pub x0: Vec<f64>,
    /// Start actually used, after moving off the nonsmooth set if needed.
    pub start: Vec<f64>,
    pub fixed_radius: bool,
    pub params: ParamsEcho,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordLine {
    pub k: usize,
    pub x: Vec<f64>,
    pub f: f64,
    pub eps: f64,
    pub nu: f64,
    pub g_norm: f64,
    pub step_kind: String,
    pub t: f64,
    pub perturbed: bool,
}

impl From<&IterationRecord> for RecordLine {
    fn from(r: &IterationRecord) -> Self {
        RecordLine {
            k: r.k,
            x: r.x.as_slice().to_vec(),
            f: r.f_val,
            eps: r.eps_k,
            nu: r.nu_k,
            g_norm: r.g_norm,
            step_kind: r.step_kind.as_str().to_string(),
            t: r.t_k,
            perturbed: r.perturbed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatusLine {
    pub status: String,
    pub final_f: f64,
    pub final_x: Vec<f64>,
}

/// The one-line result of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub status: TerminationStatus,
    pub final_f: f64,
    pub final_x: Vec<f64>,
    pub iterations: usize,
    pub step_sum: f64,
}

impl Summary {
    pub fn of(trace: &RunTrace) -> Summary {
        Summary {
            status: trace.status,
            final_f: trace.final_f,
            final_x: trace.final_x.as_slice().to_vec(),
            iterations: trace.iterations(),
            step_sum: trace.step_sum(),
        }
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x: Vec<String> = self.final_x.iter().map(|&c| fmt_real(c)).collect();
        write!(
            f,
            "status={} final_f={} final_x=[{}] iterations={} step_sum={}",
            self.status,
            fmt_real(self.final_f),
            x.join(","),
            self.iterations,
            fmt_real(self.step_sum)
        )
    }
}

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

pub fn write_trace(path: &Path, header: &Header, trace: &RunTrace) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, header)?;
    writeln!(w)?;
    for r in &trace.records {
        serde_json::to_writer(&mut w, &RecordLine::from(r))?;
        writeln!(w)?;
    }
    let status = StatusLine {
        status: trace.status.as_str().to_string(),
        final_f: trace.final_f,
        final_x: trace.final_x.as_slice().to_vec(),
    };
    serde_json::to_writer(&mut w, &status)?;
    writeln!(w)?;
    w.flush()
}

/// Reads a trace written by [`write_trace`].
pub fn read_trace(path: &Path) -> io::Result<(Header, Vec<RecordLine>, StatusLine)> {
    let lines: Vec<String> = BufReader::new(File::open(path)?).lines().collect::<io::Result<_>>()?;
    let lines: Vec<&str> = lines.iter().map(|l| l.as_str()).filter(|l| !l.trim().is_empty()).collect();
    if lines.len() < 2 {
        return Err(invalid("trace needs a header and a status line"));
    }
    let header: Header = serde_json::from_str(lines[0])?;
    let status: StatusLine = serde_json::from_str(lines[lines.len() - 1])?;
    let records = lines[1..lines.len() - 1]
        .iter()
        .map(|l| serde_json::from_str(l))
        .collect::<Result<Vec<RecordLine>, _>>()?;
    Ok((header, records, status))
}

pub fn summarize_file(path: &Path) -> io::Result<Summary> {
    let (_, records, status) = read_trace(path)?;
    let parsed = TerminationStatus::parse(&status.status)
        .ok_or_else(|| invalid(format!("unknown status `{}`", status.status)))?;
    Ok(Summary {
        status: parsed,
        final_f: status.final_f,
        final_x: status.final_x,
        iterations: records.len(),
        step_sum: records.iter().map(|r| r.t * r.g_norm).sum(),
    })
}

/// `k,f,g_norm,eps` per record, for plotting elsewhere.
pub fn write_plot_data(path: &Path, trace: &RunTrace) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["k", "f", "g_norm", "eps"])?;
    for r in &trace.records {
        w.write_record([
            r.k.to_string(),
            fmt_real(r.f_val),
            fmt_real(r.g_norm),
            fmt_real(r.eps_k),
        ])?;
    }
    w.flush()
}
