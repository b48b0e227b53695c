//! Report rows and serialization. Columns are fixed; floats carry 17
//! significant digits so reruns of the same configuration produce
//! byte-identical files.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{GnatError, Result};

/// Fixed CSV column order.
pub const CSV_COLUMNS: [&str; 14] = [
    "experiment_id",
    "point",
    "t",
    "direction",
    "lam0",
    "lam1",
    "lam2",
    "lam3",
    "nlam0",
    "nlam1",
    "nlam2",
    "nlam3",
    "residuals",
    "flags",
];

/// One report line. Rows that carry no spectrum (classification lines,
/// pattern residuals) leave the eigenvalue columns as NaN, which prints
/// as `NaN` in CSV and `null` in JSON.
#[derive(Clone, Debug, Serialize)]
pub struct ReportRow {
    pub experiment_id: String,
    /// Base point coordinates; empty when the row is point-free.
    pub point: Vec<f64>,
    pub t: f64,
    /// Direction descriptor: induced components, a pair of base vectors,
    /// or empty when the row has no direction.
    pub direction: Vec<f64>,
    /// Sorted eigenvalues.
    pub spectrum: [f64; 4],
    /// Eigenvalues divided by the squared G-length of the direction.
    pub normalized: [f64; 4],
    /// Named residuals and diagnostic scalars, in a fixed order.
    pub residuals: Vec<(String, f64)>,
    pub flags: Vec<String>,
}

pub const NO_SPECTRUM: [f64; 4] = [f64::NAN, f64::NAN, f64::NAN, f64::NAN];

impl ReportRow {
    pub fn new(experiment_id: &str) -> ReportRow {
        ReportRow {
            experiment_id: experiment_id.to_string(),
            point: Vec::new(),
            t: 0.0,
            direction: Vec::new(),
            spectrum: NO_SPECTRUM,
            normalized: NO_SPECTRUM,
            residuals: Vec::new(),
            flags: Vec::new(),
        }
    }
}

/// Copies a sorted spectrum into the fixed four columns.
pub fn four(values: &[f64]) -> [f64; 4] {
    let mut out = NO_SPECTRUM;
    for (i, v) in values.iter().take(4).enumerate() {
        out[i] = *v;
    }
    out
}

/// Metadata block: every tolerance used in a verdict appears here, along
/// with the command, the resolved inputs, and a command-specific summary.
#[derive(Clone, Debug, Serialize)]
pub struct MetaBlock {
    pub command: String,
    pub surface: String,
    pub generators: String,
    pub base_points: Vec<Vec<f64>>,
    pub fiber_directions: Vec<Vec<f64>>,
    pub t_values: Vec<f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub row_count: usize,
    /// Rows whose residual exceeded the tolerance governing them.
    pub violations: usize,
    pub summary: serde_json::Value,
}

/// 17 significant digits; non-finite values keep their display names.
pub fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

fn fmt_vector(v: &[f64]) -> String {
    if v.is_empty() {
        "-".to_string()
    } else {
        v.iter().map(|c| fmt_float(*c)).collect::<Vec<_>>().join(";")
    }
}

fn fmt_residuals(res: &[(String, f64)]) -> String {
    if res.is_empty() {
        "-".to_string()
    } else {
        res.iter()
            .map(|(name, v)| format!("{name}={}", fmt_float(*v)))
            .collect::<Vec<_>>()
            .join(";")
    }
}

fn fmt_flags(flags: &[String]) -> String {
    if flags.is_empty() {
        "-".to_string()
    } else {
        flags.join("|")
    }
}

fn csv_field(s: String) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

/// Header plus one line per row, LF endings.
pub fn emit_csv(rows: &[ReportRow]) -> String {
    let mut out = String::new();
    out.push_str(&CSV_COLUMNS.join(","));
    out.push('\n');
    for r in rows {
        let fields = [
            csv_field(r.experiment_id.clone()),
            csv_field(fmt_vector(&r.point)),
            fmt_float(r.t),
            csv_field(fmt_vector(&r.direction)),
            fmt_float(r.spectrum[0]),
            fmt_float(r.spectrum[1]),
            fmt_float(r.spectrum[2]),
            fmt_float(r.spectrum[3]),
            fmt_float(r.normalized[0]),
            fmt_float(r.normalized[1]),
            fmt_float(r.normalized[2]),
            fmt_float(r.normalized[3]),
            csv_field(fmt_residuals(&r.residuals)),
            csv_field(fmt_flags(&r.flags)),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// One JSON document embedding the metadata and the rows.
pub fn emit_json(meta: &MetaBlock, rows: &[ReportRow]) -> Result<String> {
    #[derive(Serialize)]
    struct Doc<'a> {
        meta: &'a MetaBlock,
        rows: &'a [ReportRow],
    }
    let mut s = serde_json::to_string_pretty(&Doc { meta, rows }).map_err(|e| {
        GnatError::Config(format!("report serialization failed: {e}"))
    })?;
    s.push('\n');
    Ok(s)
}

/// Metadata alone, for the sidecar file accompanying a CSV report.
pub fn emit_meta_json(meta: &MetaBlock) -> Result<String> {
    let mut s = serde_json::to_string_pretty(meta).map_err(|e| {
        GnatError::Config(format!("metadata serialization failed: {e}"))
    })?;
    s.push('\n');
    Ok(s)
}
