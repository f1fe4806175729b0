//! Bit-stable serialization: JSON with sorted keys and floats written with
//! 17 significant digits, and long-format CSV tables.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde_json::ser::{Formatter, PrettyFormatter};

use super::report::{Report, Table};
use super::HarnessError;

/// Pretty printing with every `f64` written as `{:.16e}`.
struct FixedFloat<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloat<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", float(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// `{:.16e}` for finite values; `nan`, `inf` and `-inf` otherwise.
pub fn float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Serialize any value as sorted-key JSON with fixed float formatting.
/// Non-finite floats become `null`.
pub fn json_string<T: serde::Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report values serialize");
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloat(PrettyFormatter::new()));
    serde::Serialize::serialize(&v, &mut ser).expect("writing to memory");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON is UTF-8")
}

pub fn to_json(report: &Report) -> String {
    json_string(report)
}

fn csv_bytes(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for r in rows {
        w.write_record(&r).expect("writing to memory");
    }
    w.into_inner().expect("flushing memory")
}

/// Long format: one row per point and column,
/// `index, <coordinates…>, column, value`; failed points give `nan`.
pub fn points_csv(t: &Table) -> Vec<u8> {
    let mut header = vec!["index".to_string()];
    header.extend(t.coordinates.iter().cloned());
    header.extend(["column".to_string(), "value".to_string()]);
    let rows = t.rows.iter().enumerate().flat_map(move |(i, row)| {
        t.columns.iter().enumerate().map(move |(j, c)| {
            let mut r = vec![i.to_string()];
            r.extend(t.points[i].iter().map(|x| float(*x)));
            r.push(c.clone());
            r.push(row.as_ref().map_or_else(|| float(f64::NAN), |v| float(v[j])));
            r
        })
    });
    csv_bytes(&header, rows)
}

/// One row per equation: `equation, components, max, mean, l2, tolerance, pass`.
pub fn summary_csv(r: &Report) -> Vec<u8> {
    let header: Vec<String> = ["equation", "components", "max", "mean", "l2", "tolerance", "pass"]
        .map(String::from)
        .to_vec();
    let rows = r.equations.iter().map(|e| {
        vec![
            e.name.clone(),
            e.components.to_string(),
            float(e.max),
            float(e.mean),
            float(e.l2),
            e.tolerance.map_or_else(String::new, float),
            e.pass.to_string(),
        ]
    });
    csv_bytes(&header, rows)
}

fn write(path: PathBuf, bytes: &[u8]) -> Result<PathBuf, HarnessError> {
    fs::write(&path, bytes).map_err(|source| HarnessError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Write `report.json` and, when `csv` is set, `points.csv`, `summary.csv`
/// and one file per artifact into `dir`.
pub fn write_artifacts(report: &Report, dir: &Path, csv: bool) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = vec![write(dir.join("report.json"), to_json(report).as_bytes())?];
    if csv {
        written.push(write(dir.join("points.csv"), &points_csv(&report.table))?);
        written.push(write(dir.join("summary.csv"), &summary_csv(report))?);
        for a in &report.artifacts {
            let rows = a.rows.iter().map(|r| r.iter().map(|x| float(*x)).collect());
            written.push(write(dir.join(format!("{}.csv", a.name)), &csv_bytes(&a.header, rows))?);
        }
    }
    Ok(written)
}
