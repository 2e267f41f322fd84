//! Output schemas and the CSV/JSON writers behind every subcommand.
//!
//! Both formats carry the same fixed key sets. CSV prints every float with
//! 17 significant digits (`{:.16e}`), enough to round-trip f64 exactly; the
//! fields never contain commas, quotes, or line breaks, so plain RFC-4180
//! unquoted fields suffice. JSON cannot represent infinities, so values that
//! are not finite (the curvature at a cusp row) are emitted as `null`; CSV
//! prints `inf` there.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::config::OutputFormat;
use crate::CliError;

/// One curve sample row: arclength, position, unit tangent, curvature,
/// torsion.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurveRow {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub tx: f64,
    pub ty: f64,
    pub tz: f64,
    pub kappa: Option<f64>,
    pub tau: Option<f64>,
}

impl CurveRow {
    pub fn new(s: f64, x: [f64; 3], t: [f64; 3], kappa: f64, tau: f64) -> Self {
        Self {
            s,
            x: x[0],
            y: x[1],
            z: x[2],
            tx: t[0],
            ty: t[1],
            tz: t[2],
            kappa: kappa.is_finite().then_some(kappa),
            tau: tau.is_finite().then_some(tau),
        }
    }
}

/// One reachable-cone boundary point: stratum tag, position, unit tangent.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConeRow {
    pub surface: &'static str,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub nx: f64,
    pub ny: f64,
    pub nz: f64,
}

/// Boundary value solver report: the recovered search point and residuals.
#[derive(Debug, Clone, Serialize)]
pub struct SolveRow {
    pub method: &'static str,
    pub seed: u64,
    pub w01: f64,
    pub w02: f64,
    pub dw01: f64,
    pub dw02: f64,
    pub length: f64,
    pub objective: f64,
    pub position_residual: f64,
    pub angle_residual: f64,
    pub evaluations: usize,
    pub best_restart: usize,
    pub converged: bool,
}

/// One invariant-suite verdict.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub worst: f64,
    pub op: &'static str,
    pub bound: f64,
    pub cases: usize,
    pub pass: bool,
}

/// One benchmark measurement over `repeats` runs.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BenchRow {
    pub method: &'static str,
    pub n: usize,
    pub seconds: f64,
    pub min_seconds: f64,
    pub max_seconds: f64,
}

/// A row type that knows its CSV header and field rendering.
pub trait Row: Serialize {
    fn header() -> &'static str;
    fn fields(&self) -> Vec<String>;
}

fn f(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    match v {
        Some(v) => f(v),
        None => "inf".to_string(),
    }
}

impl Row for CurveRow {
    fn header() -> &'static str {
        "s,x,y,z,tx,ty,tz,kappa,tau"
    }

    fn fields(&self) -> Vec<String> {
        vec![
            f(self.s),
            f(self.x),
            f(self.y),
            f(self.z),
            f(self.tx),
            f(self.ty),
            f(self.tz),
            opt(self.kappa),
            opt(self.tau),
        ]
    }
}

impl Row for ConeRow {
    fn header() -> &'static str {
        "surface,x,y,z,nx,ny,nz"
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.surface.to_string(),
            f(self.x),
            f(self.y),
            f(self.z),
            f(self.nx),
            f(self.ny),
            f(self.nz),
        ]
    }
}

impl Row for SolveRow {
    fn header() -> &'static str {
        "method,seed,w01,w02,dw01,dw02,length,objective,position_residual,angle_residual,evaluations,best_restart,converged"
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.method.to_string(),
            self.seed.to_string(),
            f(self.w01),
            f(self.w02),
            f(self.dw01),
            f(self.dw02),
            f(self.length),
            f(self.objective),
            f(self.position_residual),
            f(self.angle_residual),
            self.evaluations.to_string(),
            self.best_restart.to_string(),
            self.converged.to_string(),
        ]
    }
}

impl Row for CheckRow {
    fn header() -> &'static str {
        "name,worst,op,bound,cases,pass"
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.name.clone(),
            f(self.worst),
            self.op.to_string(),
            f(self.bound),
            self.cases.to_string(),
            self.pass.to_string(),
        ]
    }
}

impl Row for BenchRow {
    fn header() -> &'static str {
        "method,n,seconds,min_seconds,max_seconds"
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.method.to_string(),
            self.n.to_string(),
            f(self.seconds),
            f(self.min_seconds),
            f(self.max_seconds),
        ]
    }
}

/// Writes rows to `output` (or standard output when `None`) in the chosen
/// format. Output is byte-deterministic for identical rows.
pub fn write_rows<R: Row>(
    rows: &[R],
    format: OutputFormat,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let io_err = |e: io::Error| CliError::internal(format!("write failed: {e}"));
    let mut sink: BufWriter<Box<dyn Write>> = match output {
        Some(path) => {
            let file = File::create(path).map_err(|e| {
                CliError::internal(format!("cannot create {}: {e}", path.display()))
            })?;
            BufWriter::new(Box::new(file))
        }
        None => BufWriter::new(Box::new(io::stdout().lock())),
    };
    match format {
        OutputFormat::Csv => {
            writeln!(sink, "{}", R::header()).map_err(io_err)?;
            for row in rows {
                writeln!(sink, "{}", row.fields().join(",")).map_err(io_err)?;
            }
        }
        OutputFormat::Json => {
            let text = serde_json::to_string_pretty(rows)
                .map_err(|e| CliError::internal(format!("serialization failed: {e}")))?;
            writeln!(sink, "{text}").map_err(io_err)?;
        }
    }
    sink.flush().map_err(io_err)
}
