use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::args::Format;
use crate::CliError;

/// One solver run. Flat so that the CSV header is the field list below;
/// absent values are `null` in JSON and empty cells in CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// `sphere:LEVEL,RADIUS` or `msms:VERT_PATH`.
    pub mesh_source: String,
    pub n_vertices: usize,
    pub n_faces: usize,
    pub eps1: f64,
    pub eps2: f64,
    pub kappa: f64,
    pub n_charges: usize,
    pub scheme: String,
    pub regular_rule: String,
    pub regular_rule_degree: u32,
    pub singular_rule: Option<String>,
    /// kcal/mol.
    pub energy: f64,
    /// Kirkwood energy when the problem is a sphere with interior charges.
    pub exact_energy: Option<f64>,
    /// Max-norm relative surface-potential error against Kirkwood.
    pub e_phi: Option<f64>,
    /// Order against the previous level of a sweep, in mesh density.
    pub observed_order: Option<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub t_discretize: Option<f64>,
    pub t_solve: Option<f64>,
    pub t_energy: Option<f64>,
    pub workers: usize,
    /// Quadrature caches plus Krylov basis; a lower bound on resident memory.
    pub memory_lower_bound_mb: f64,
}

impl RunReport {
    pub fn numbers(&self) -> Vec<Option<f64>> {
        vec![
            Some(self.n_vertices as f64),
            Some(self.n_faces as f64),
            Some(self.eps1),
            Some(self.eps2),
            Some(self.kappa),
            Some(self.n_charges as f64),
            Some(f64::from(self.regular_rule_degree)),
            Some(self.energy),
            self.exact_energy,
            self.e_phi,
            self.observed_order,
            Some(self.iterations as f64),
            Some(self.residual),
            self.t_discretize,
            self.t_solve,
            self.t_energy,
            Some(self.workers as f64),
            Some(self.memory_lower_bound_mb),
        ]
    }

    pub fn all_finite(&self) -> bool {
        self.numbers().iter().flatten().all(|v| v.is_finite())
    }
}

/// One row of a scaling study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub workers: usize,
    /// Solve-phase wall time in seconds.
    pub wall_time: f64,
    pub speedup: f64,
    /// `T1 / (p Tp)`.
    pub efficiency: f64,
    /// Max abs difference of the solution vector from the one-worker run.
    pub max_abs_diff: f64,
    pub iterations: usize,
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, out: &mut dyn Write) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| CliError::Output(e.to_string()))?;
    writeln!(out).map_err(|e| CliError::Output(e.to_string()))
}

pub fn write_csv<T: Serialize>(rows: &[T], out: &mut dyn Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Output(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Output(e.to_string()))
}

/// Writes rows as a JSON array or as CSV with a header line.
pub fn write_rows<T: Serialize>(rows: &[T], format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    match format {
        Format::Json => write_json(rows, out),
        Format::Csv => write_csv(rows, out),
    }
}

pub fn read_json_reports(text: &str) -> Result<Vec<RunReport>, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Output(e.to_string()))
}

pub fn read_csv_reports(text: &str) -> Result<Vec<RunReport>, CliError> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Output(e.to_string()))
}
