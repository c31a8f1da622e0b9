//! CSV tables with 17-significant-digit numbers and JSON report files.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::eds::ReconstructionReport;
use crate::error::{Error, Result};
use crate::semigroup::{InterpolationReport, MonotonicityReport};
use crate::surface::SweepReport;
use crate::verifier::VerificationReport;

/// One CSV cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Field {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Num(v)
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Int(v as i64)
    }
}

impl From<bool> for Field {
    fn from(v: bool) -> Self {
        Field::Bool(v)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Text(v.to_string())
    }
}

impl From<String> for Field {
    fn from(v: String) -> Self {
        Field::Text(v)
    }
}

impl<T: Into<Field>> From<Option<T>> for Field {
    fn from(v: Option<T>) -> Self {
        v.map_or(Field::Empty, Into::into)
    }
}

/// `v` with 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Num(v) => f.write_str(&format_float(*v)),
            Field::Int(v) => write!(f, "{v}"),
            Field::Bool(v) => write!(f, "{v}"),
            Field::Text(s) => f.write_str(s),
            Field::Empty => Ok(()),
        }
    }
}

impl Field {
    fn parse(text: &str) -> Field {
        if text.is_empty() {
            return Field::Empty;
        }
        match text {
            "true" => return Field::Bool(true),
            "false" => return Field::Bool(false),
            _ => {}
        }
        if let Ok(i) = text.parse::<i64>() {
            return Field::Int(i);
        }
        let looks_numeric = text
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'))
            || matches!(text, "NaN" | "inf" | "-inf");
        match text.parse::<f64>() {
            Ok(v) if looks_numeric => Field::Num(v),
            _ => Field::Text(text.to_string()),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Field::Num(v) => Some(v),
            Field::Int(v) => Some(v as f64),
            _ => None,
        }
    }
}

/// A header row and data rows of equal width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Field>>,
}

fn io_error(e: impl fmt::Display) -> Error {
    Error::Io(e.to_string())
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Table {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Field>) -> Result<()> {
        if row.len() != self.headers.len() {
            return Err(Error::Io(format!(
                "row has {} fields, table has {} columns",
                row.len(),
                self.headers.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64()).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).map_err(io_error)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Field::to_string))
                .map_err(io_error)?;
        }
        let bytes = w.into_inner().map_err(io_error)?;
        String::from_utf8(bytes).map_err(io_error)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let headers = r
            .headers()
            .map_err(io_error)?
            .iter()
            .map(String::from)
            .collect();
        let mut table = Table {
            headers,
            rows: Vec::new(),
        };
        for record in r.records() {
            let record = record.map_err(io_error)?;
            table.push(record.iter().map(Field::parse).collect())?;
        }
        Ok(table)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()?).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_csv(&text)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(io_error)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(io_error)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)?).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    from_json(&text)
}

pub fn sweep_table(r: &SweepReport) -> Result<Table> {
    let mut t = Table::new([
        "x",
        "y",
        "a11",
        "a12",
        "a22",
        "eig_max",
        "residual",
        "relative_residual",
        "nsd",
    ]);
    for row in &r.rows {
        t.push(vec![
            row.x.into(),
            row.y.into(),
            row.a11.into(),
            row.a12.into(),
            row.a22.into(),
            row.eig_max.into(),
            row.residual.into(),
            row.relative_residual.into(),
            row.nsd.into(),
        ])?;
    }
    Ok(t)
}

pub fn reconstruction_table(r: &ReconstructionReport) -> Result<Table> {
    let mut t = Table::new([
        "x",
        "y",
        "M",
        "p",
        "q",
        "iterations",
        "residual",
        "reference",
        "deviation",
        "gradient_error",
        "nsd",
        "relative_degeneracy",
        "status",
    ]);
    for n in &r.nodes {
        t.push(vec![
            n.x.into(),
            n.y.into(),
            n.result.m.into(),
            n.result.p.into(),
            n.result.q.into(),
            n.result.iterations.into(),
            n.result.residual.into(),
            n.reference.into(),
            n.deviation().into(),
            n.gradient_error.into(),
            n.nsd.into(),
            n.relative_degeneracy.into(),
            "ok".into(),
        ])?;
    }
    for f in &r.failed {
        let mut row = vec![Field::from(f.x), f.y.into()];
        row.extend(std::iter::repeat_n(Field::Empty, 10));
        row.push(format!("failed: {}", f.reason).into());
        t.push(row)?;
    }
    Ok(t)
}

pub const REPORT_COLUMNS: [&str; 11] = [
    "case",
    "surface",
    "test_function",
    "n",
    "sigma",
    "order",
    "lhs",
    "rhs",
    "margin",
    "pass",
    "notes",
];

pub fn reports_table(reports: &[VerificationReport]) -> Result<Table> {
    let mut t = Table::new(REPORT_COLUMNS);
    for r in reports {
        t.push(vec![
            r.case.clone().into(),
            r.surface.clone().into(),
            r.test_function.clone().into(),
            r.n.into(),
            r.sigma.into(),
            r.order.into(),
            r.lhs.into(),
            r.rhs.into(),
            r.margin.into(),
            r.pass.into(),
            r.notes.join("; ").into(),
        ])?;
    }
    Ok(t)
}

pub fn interpolation_table(r: &InterpolationReport) -> Result<Table> {
    let mut t = Table::new(["t", "x", "lhs", "rhs", "violation"]);
    for p in &r.points {
        t.push(vec![
            p.t.into(),
            p.x.into(),
            p.lhs.into(),
            p.rhs.into(),
            (p.lhs - p.rhs).into(),
        ])?;
    }
    Ok(t)
}

pub fn monotonicity_table(r: &MonotonicityReport) -> Result<Table> {
    let mut t = Table::new(["t", "G"]);
    for p in &r.trace {
        t.push(vec![p.t.into(), p.g.into()])?;
    }
    Ok(t)
}
