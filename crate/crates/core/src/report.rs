//! Per-iteration trace records, solver reports and their serialized forms.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Header of the CSV trace stream.
pub const TRACE_HEADER: &str = "iter,wall_s,f,f_mu,gap_est,rho,a,A,inner_iters";

/// One accepted outer iteration.
///
/// The CSV stream carries the first nine fields; the rest are kept in
/// memory for audits of the ρ window and the monotone-progress property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iter: usize,
    pub wall_s: f64,
    /// Exact (non-smooth) objective at the new iterate.
    pub f: f64,
    /// Smoothed objective at the new iterate.
    pub f_mu: f64,
    pub gap_est: f64,
    pub rho: f64,
    pub a: f64,
    /// `A_{k+1}`
    #[serde(rename = "A")]
    pub big_a: f64,
    pub inner_iters: usize,

    /// `A_k`, before this iteration's increment.
    pub prev_big_a: f64,
    /// `‖x_{k+1} − y_k‖²_B`
    pub displacement_sq: f64,
    /// `f_μ(y_k)`
    pub f_mu_y: f64,
    pub probes: usize,
    /// Final ρ bracket of the search.
    pub bracket: (f64, f64),
    pub epoch: usize,
}

impl TracePoint {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.iter,
            self.wall_s,
            self.f,
            self.f_mu,
            self.gap_est,
            self.rho,
            self.a,
            self.big_a,
            self.inner_iters
        )
    }
}

/// Receives trace points as they are produced.
pub trait TraceSink {
    fn record(&mut self, point: &TracePoint) -> Result<()>;
}

/// Discards everything.
pub struct NullSink;

impl TraceSink for NullSink {
    fn record(&mut self, _point: &TracePoint) -> Result<()> {
        Ok(())
    }
}

/// Append-only CSV writer, flushed after every row.
pub struct CsvTrace<W: Write> {
    out: W,
}

impl<W: Write> CsvTrace<W> {
    pub fn new(mut out: W) -> std::io::Result<Self> {
        writeln!(out, "{TRACE_HEADER}")?;
        out.flush()?;
        Ok(Self { out })
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl CsvTrace<BufWriter<File>> {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::new(BufWriter::new(file)).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

impl<W: Write> TraceSink for CsvTrace<W> {
    fn record(&mut self, point: &TracePoint) -> Result<()> {
        let io = |source| Error::Io {
            path: "<trace>".into(),
            source,
        };
        writeln!(self.out, "{}", point.csv_row()).map_err(io)?;
        self.out.flush().map_err(io)
    }
}

/// Parses a CSV trace back into `(iter, wall_s, f, f_mu, gap_est, rho, a, A,
/// inner_iters)` rows.
pub fn read_trace_csv(text: &str) -> Result<Vec<[f64; 9]>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == TRACE_HEADER => {}
        other => {
            return Err(Error::Parse {
                path: "<trace>".into(),
                line: 1,
                message: format!("unexpected header {other:?}"),
            })
        }
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let mut row = [0.0; 9];
            let fields: Vec<&str> = l.split(',').collect();
            if fields.len() != 9 {
                return Err(Error::Parse {
                    path: "<trace>".into(),
                    line: i + 2,
                    message: format!("expected 9 fields, found {}", fields.len()),
                });
            }
            for (slot, field) in row.iter_mut().zip(fields) {
                *slot = field.trim().parse().map_err(|_| Error::Parse {
                    path: "<trace>".into(),
                    line: i + 2,
                    message: format!("bad number `{field}`"),
                })?;
            }
            Ok(row)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Converged,
    CapReached,
    InnerFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Accel,
    Agd,
    Subgradient,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Accel => "accel",
            Method::Agd => "agd",
            Method::Subgradient => "subgradient",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "accel" => Ok(Method::Accel),
            "agd" => Ok(Method::Agd),
            "subgradient" => Ok(Method::Subgradient),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

/// Outcome of a solver run.
#[derive(Debug, Clone)]
pub struct SolverReport {
    pub method: Method,
    pub x: Vec<f64>,
    pub f: f64,
    pub f_mu: f64,
    pub gap_est: f64,
    pub iterations: usize,
    pub status: Status,
    pub trace: Vec<TracePoint>,
    pub epochs: usize,
    /// Lowest smoothed value seen, including the start, and where.
    pub best_f_mu: f64,
    pub best_x: Vec<f64>,
    /// Set when the run stopped on an inner failure.
    pub message: Option<String>,
}

/// The `report.json` document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    pub method: String,
    pub eps: f64,
    pub mu: f64,
    pub l3: f64,
    pub iterations: usize,
    pub final_f: f64,
    pub final_f_mu: f64,
    pub status: Status,
    pub seed: Option<u64>,
    pub config_echo: BTreeMap<String, serde_json::Value>,
}

impl RunRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record is always serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(iter: usize) -> TracePoint {
        TracePoint {
            iter,
            wall_s: 0.25,
            f: 1.0 / 3.0,
            f_mu: 0.5,
            gap_est: 1e-3,
            rho: 2.5e-7,
            a: 12.0,
            big_a: 30.5,
            inner_iters: 7,
            prev_big_a: 18.5,
            displacement_sq: 2.4e-7,
            f_mu_y: 0.6,
            probes: 2,
            bracket: (1e-7, 1e-6),
            epoch: 0,
        }
    }

    #[test]
    fn csv_stream_round_trips_exactly() {
        let mut sink = CsvTrace::new(Vec::new()).unwrap();
        sink.record(&point(1)).unwrap();
        sink.record(&point(2)).unwrap();
        let text = String::from_utf8(sink.into_inner()).unwrap();
        assert!(text.starts_with("iter,wall_s,f,f_mu,gap_est,rho,a,A,inner_iters\n"));
        let rows = read_trace_csv(&text).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0][2], 1.0 / 3.0);
        assert_eq!(rows[1][0], 2.0);
        assert!(read_trace_csv("nope\n1,2").is_err());
    }

    #[test]
    fn record_json_has_schema_keys() {
        let rec = RunRecord {
            problem: "linf".into(),
            method: "accel".into(),
            eps: 0.01,
            mu: 0.001,
            l3: 1.5e10,
            iterations: 4,
            final_f: 0.2,
            final_f_mu: 0.21,
            status: Status::Converged,
            seed: Some(3),
            config_echo: BTreeMap::new(),
        };
        let v: serde_json::Value = serde_json::from_str(&rec.to_json()).unwrap();
        for key in [
            "problem",
            "method",
            "eps",
            "mu",
            "l3",
            "iterations",
            "final_f",
            "final_f_mu",
            "status",
            "seed",
            "config_echo",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["status"], "Converged");
    }
}
