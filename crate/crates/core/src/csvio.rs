//! CSV emission and parsing for diagnostics, sweep tables and fields.
//!
//! Floats are written with 17 significant digits, so every finite value
//! reads back bit-for-bit. Missing values are written as `NaN`. Lines
//! starting with `#` before the header are free-form comments.

use std::io::{Read, Write};

use thiserror::Error;

use crate::equilibrium::SweepRow;
use crate::kinetics::{DiagnosticRecord, DistributionField};

pub const DIAGNOSTICS_HEADER: [&str; 11] = ["t", "rho", "E", "S", "F", "G", "Gtilde", "A", "B", "U", "mass_error"];

pub const SWEEP_HEADER: [&str; 21] = [
    "k",
    "n",
    "volume",
    "rho",
    "status",
    "C",
    "kC",
    "E_q",
    "E_c",
    "S_q",
    "S_c",
    "F_q",
    "F_c",
    "residual",
    "in_window",
    "energy_order",
    "entropy_order",
    "free_energy_order",
    "constant_bounds",
    "violations",
    "message",
];

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Format { line: u64, message: String },
}

pub type Result<T> = std::result::Result<T, CsvError>;

/// 17 significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn format_optional(x: Option<f64>) -> String {
    x.map_or_else(|| "NaN".to_string(), format_float)
}

fn write_comments<W: Write>(out: &mut W, comments: &[String]) -> Result<()> {
    for line in comments {
        for part in line.lines() {
            writeln!(out, "# {part}")?;
        }
    }
    Ok(())
}

fn reader<R: Read>(input: R, has_headers: bool) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(has_headers)
        .flexible(false)
        .from_reader(input)
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn format_error(record: &csv::StringRecord, message: impl Into<String>) -> CsvError {
    CsvError::Format {
        line: line_of(record),
        message: message.into(),
    }
}

fn parse_float(record: &csv::StringRecord, idx: usize, name: &str) -> Result<f64> {
    let field = record.get(idx).unwrap_or("");
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| format_error(record, format!("column {name}: cannot parse {field:?} as a number")))
}

fn parse_optional(record: &csv::StringRecord, idx: usize, name: &str) -> Result<Option<f64>> {
    let x = parse_float(record, idx, name)?;
    Ok((!x.is_nan()).then_some(x))
}

fn check_header(reader: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = reader.headers()?.clone();
    if header.iter().ne(expected.iter().copied()) {
        return Err(format_error(
            &header,
            format!("expected header {:?}, found {:?}", expected.join(","), header.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    Ok(())
}

/// One row of a diagnostics file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRow {
    pub t: f64,
    pub rho: f64,
    pub energy: f64,
    pub entropy: f64,
    pub free_energy: f64,
    pub g: Option<f64>,
    pub g_tilde: f64,
    pub energy_flux: f64,
    pub density_flux: f64,
    pub entropy_flux: f64,
    pub mass_error: f64,
}

impl From<&DiagnosticRecord> for DiagnosticRow {
    fn from(r: &DiagnosticRecord) -> Self {
        Self {
            t: r.t,
            rho: r.rho,
            energy: r.energy,
            entropy: r.entropy,
            free_energy: r.free_energy,
            g: r.g,
            g_tilde: r.g_tilde,
            energy_flux: r.fluxes.energy,
            density_flux: r.fluxes.density,
            entropy_flux: r.fluxes.entropy,
            mass_error: r.mass_error,
        }
    }
}

pub fn write_diagnostics<W: Write>(mut out: W, comments: &[String], rows: &[DiagnosticRow]) -> Result<()> {
    write_comments(&mut out, comments)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DIAGNOSTICS_HEADER)?;
    for r in rows {
        w.write_record([
            format_float(r.t),
            format_float(r.rho),
            format_float(r.energy),
            format_float(r.entropy),
            format_float(r.free_energy),
            format_optional(r.g),
            format_float(r.g_tilde),
            format_float(r.energy_flux),
            format_float(r.density_flux),
            format_float(r.entropy_flux),
            format_float(r.mass_error),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_diagnostics<R: Read>(input: R) -> Result<Vec<DiagnosticRow>> {
    let mut rdr = reader(input, true);
    check_header(&mut rdr, &DIAGNOSTICS_HEADER)?;
    let mut rows = Vec::new();
    for record in rdr.records() {
        let r = record?;
        let f = |idx: usize| parse_float(&r, idx, DIAGNOSTICS_HEADER[idx]);
        rows.push(DiagnosticRow {
            t: f(0)?,
            rho: f(1)?,
            energy: f(2)?,
            entropy: f(3)?,
            free_energy: f(4)?,
            g: parse_optional(&r, 5, "G")?,
            g_tilde: f(6)?,
            energy_flux: f(7)?,
            density_flux: f(8)?,
            entropy_flux: f(9)?,
            mass_error: f(10)?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepStatus {
    Ok,
    Supercritical,
    Failed,
}

impl SweepStatus {
    fn as_str(self) -> &'static str {
        match self {
            SweepStatus::Ok => "ok",
            SweepStatus::Supercritical => "supercritical",
            SweepStatus::Failed => "failed",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "ok" => Some(SweepStatus::Ok),
            "supercritical" => Some(SweepStatus::Supercritical),
            "failed" => Some(SweepStatus::Failed),
            _ => None,
        }
    }
}

/// Derived quantities and verdicts of a solved sweep row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepValues {
    pub c: f64,
    pub kc: f64,
    pub energy: f64,
    pub energy_classical: f64,
    pub entropy: f64,
    pub entropy_classical: f64,
    pub free_energy: f64,
    pub free_energy_classical: f64,
    pub residual: f64,
    pub in_window: bool,
    pub energy_order: bool,
    pub entropy_order: bool,
    pub free_energy_order: bool,
    pub constant_bounds: bool,
}

/// Flat form of a sweep row as stored in CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub k: f64,
    pub n: u32,
    pub volume: f64,
    pub rho: f64,
    pub status: SweepStatus,
    pub values: Option<SweepValues>,
    pub violations: usize,
    pub message: String,
}

impl SweepRecord {
    /// Flattens a sweep row; `n`, `volume` and `rho` are taken from the
    /// solution or, for failed rows, from `fallback`.
    pub fn from_row(row: &SweepRow, fallback: &crate::equilibrium::ModelParams) -> Self {
        match &row.outcome {
            Ok((sol, v)) => Self {
                k: row.k,
                n: sol.params.n,
                volume: sol.params.volume,
                rho: sol.params.density,
                status: SweepStatus::Ok,
                values: Some(SweepValues {
                    c: sol.c,
                    kc: sol.kc,
                    energy: sol.energy,
                    energy_classical: sol.classical.energy,
                    entropy: sol.entropy,
                    entropy_classical: sol.classical.entropy,
                    free_energy: sol.free_energy,
                    free_energy_classical: sol.classical.free_energy,
                    residual: sol.residual,
                    in_window: v.in_window,
                    energy_order: v.energy_order,
                    entropy_order: v.entropy_order,
                    free_energy_order: v.free_energy_order,
                    constant_bounds: v.constant_bounds,
                }),
                violations: row.violations(),
                message: String::new(),
            },
            Err(msg) => Self {
                k: row.k,
                n: fallback.n,
                volume: fallback.volume,
                rho: fallback.density,
                status: if row.is_supercritical() {
                    SweepStatus::Supercritical
                } else {
                    SweepStatus::Failed
                },
                values: None,
                violations: 0,
                message: msg.clone(),
            },
        }
    }
}

pub fn write_sweep<W: Write>(mut out: W, comments: &[String], rows: &[SweepRecord]) -> Result<()> {
    write_comments(&mut out, comments)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        let mut fields = vec![
            format_float(r.k),
            r.n.to_string(),
            format_float(r.volume),
            format_float(r.rho),
            r.status.as_str().to_string(),
        ];
        match &r.values {
            Some(v) => {
                fields.extend(
                    [
                        v.c,
                        v.kc,
                        v.energy,
                        v.energy_classical,
                        v.entropy,
                        v.entropy_classical,
                        v.free_energy,
                        v.free_energy_classical,
                        v.residual,
                    ]
                    .map(format_float),
                );
                fields.extend(
                    [v.in_window, v.energy_order, v.entropy_order, v.free_energy_order, v.constant_bounds]
                        .map(|b| b.to_string()),
                );
            }
            None => {
                fields.extend(std::iter::repeat_n("NaN".to_string(), 9));
                fields.extend(std::iter::repeat_n(String::new(), 5));
            }
        }
        fields.push(r.violations.to_string());
        fields.push(r.message.clone());
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_bool(record: &csv::StringRecord, idx: usize) -> Result<bool> {
    match record.get(idx) {
        Some("true") => Ok(true),
        Some("false") => Ok(false),
        other => Err(format_error(
            record,
            format!("column {}: expected true or false, found {:?}", SWEEP_HEADER[idx], other.unwrap_or("")),
        )),
    }
}

pub fn parse_sweep<R: Read>(input: R) -> Result<Vec<SweepRecord>> {
    let mut rdr = reader(input, true);
    check_header(&mut rdr, &SWEEP_HEADER)?;
    let mut rows = Vec::new();
    for record in rdr.records() {
        let r = record?;
        let f = |idx: usize| parse_float(&r, idx, SWEEP_HEADER[idx]);
        let n = r.get(1).unwrap_or("").parse::<u32>().map_err(|_| format_error(&r, "column n: not an integer"))?;
        let status = SweepStatus::parse(r.get(4).unwrap_or(""))
            .ok_or_else(|| format_error(&r, "column status: expected ok, supercritical or failed"))?;
        let values = if status == SweepStatus::Ok {
            Some(SweepValues {
                c: f(5)?,
                kc: f(6)?,
                energy: f(7)?,
                energy_classical: f(8)?,
                entropy: f(9)?,
                entropy_classical: f(10)?,
                free_energy: f(11)?,
                free_energy_classical: f(12)?,
                residual: f(13)?,
                in_window: parse_bool(&r, 14)?,
                energy_order: parse_bool(&r, 15)?,
                entropy_order: parse_bool(&r, 16)?,
                free_energy_order: parse_bool(&r, 17)?,
                constant_bounds: parse_bool(&r, 18)?,
            })
        } else {
            None
        };
        let violations = r
            .get(19)
            .unwrap_or("")
            .parse::<usize>()
            .map_err(|_| format_error(&r, "column violations: not an integer"))?;
        rows.push(SweepRecord {
            k: f(0)?,
            n,
            volume: f(2)?,
            rho: f(3)?,
            status,
            values,
            violations,
            message: r.get(20).unwrap_or("").to_string(),
        });
    }
    Ok(rows)
}

/// Writes `f` as a matrix with one row per x-node and one column per v-node.
pub fn write_field<W: Write>(mut out: W, comments: &[String], field: &DistributionField) -> Result<()> {
    write_comments(&mut out, comments)?;
    let mut w = csv::Writer::from_writer(out);
    for i in 0..field.x_nodes() {
        w.write_record(field.row(i).iter().map(|&x| format_float(x)))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a rectangular numeric matrix written by [`write_field`].
pub fn parse_field<R: Read>(input: R) -> Result<Vec<Vec<f64>>> {
    let mut rdr = reader(input, false);
    let mut rows = Vec::new();
    for record in rdr.records() {
        let r = record?;
        let row = (0..r.len()).map(|j| parse_float(&r, j, &j.to_string())).collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}
