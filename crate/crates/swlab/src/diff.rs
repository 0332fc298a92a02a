//! Fieldwise comparison of two data files of the same schema.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Divergence {
    pub field: String,
    pub left: String,
    pub right: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffReport {
    pub equal: bool,
    pub compared: usize,
    pub divergent: Vec<Divergence>,
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::config(format!("schema mismatch: {}", msg.into()))
}

struct Walk {
    tol: f64,
    compared: usize,
    divergent: Vec<Divergence>,
}

impl Walk {
    fn leaf(&mut self, field: String, a: &str, b: &str, equal: bool) {
        self.compared += 1;
        if !equal {
            self.divergent.push(Divergence { field, left: a.into(), right: b.into() });
        }
    }

    fn value(&mut self, path: &str, a: &Value, b: &Value) -> CliResult<()> {
        match (a, b) {
            (Value::Object(x), Value::Object(y)) => {
                if x.keys().ne(y.keys()) {
                    return Err(schema(format!("keys differ under '{path}'")));
                }
                for (k, v) in x {
                    self.value(&format!("{path}.{k}"), v, &y[k])?;
                }
            }
            (Value::Array(x), Value::Array(y)) => {
                if x.len() != y.len() {
                    self.leaf(format!("{path}.len"), &x.len().to_string(), &y.len().to_string(), false);
                    return Ok(());
                }
                for (i, (u, v)) in x.iter().zip(y).enumerate() {
                    self.value(&format!("{path}[{i}]"), u, v)?;
                }
            }
            (Value::Number(x), Value::Number(y)) => {
                let (p, q) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
                self.leaf(path.into(), &x.to_string(), &y.to_string(), close(p, q, self.tol));
            }
            (x, y) if std::mem::discriminant(x) == std::mem::discriminant(y) || x.is_null() || y.is_null() => {
                self.leaf(path.into(), &x.to_string(), &y.to_string(), x == y);
            }
            _ => return Err(schema(format!("types differ at '{path}'"))),
        }
        Ok(())
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))
}

fn csv_rows(text: &str) -> CliResult<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| schema(e.to_string()))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(|e| schema(e.to_string()))?.iter().map(String::from).collect());
    }
    Ok((header, rows))
}

/// Cells parse as floats where both sides do; other cells are compared
/// as text.
pub fn diff_csv(a: &str, b: &str, tol: f64) -> CliResult<DiffReport> {
    let (ha, ra) = csv_rows(a)?;
    let (hb, rb) = csv_rows(b)?;
    if ha != hb {
        return Err(schema(format!("columns {ha:?} vs {hb:?}")));
    }
    let mut w = Walk { tol, compared: 0, divergent: Vec::new() };
    if ra.len() != rb.len() {
        w.leaf("rows".into(), &ra.len().to_string(), &rb.len().to_string(), false);
    }
    for (i, (x, y)) in ra.iter().zip(&rb).enumerate() {
        for (c, (u, v)) in x.iter().zip(y).enumerate() {
            let eq = match (u.parse::<f64>(), v.parse::<f64>()) {
                (Ok(p), Ok(q)) => close(p, q, tol) || (p.is_nan() && q.is_nan()),
                _ => u == v,
            };
            w.leaf(format!("row {i}, {}", ha[c]), u, v, eq);
        }
    }
    Ok(DiffReport { equal: w.divergent.is_empty(), compared: w.compared, divergent: w.divergent })
}

pub fn diff_json(a: &str, b: &str, tol: f64) -> CliResult<DiffReport> {
    let parse = |s: &str| serde_json::from_str::<Value>(s).map_err(|e| schema(e.to_string()));
    let (x, y) = (parse(a)?, parse(b)?);
    if x.get("schema") != y.get("schema") {
        return Err(schema(format!("{:?} vs {:?}", x.get("schema"), y.get("schema"))));
    }
    let mut w = Walk { tol, compared: 0, divergent: Vec::new() };
    w.value("$", &x, &y)?;
    Ok(DiffReport { equal: w.divergent.is_empty(), compared: w.compared, divergent: w.divergent })
}

/// Compares two files by their extension: `.csv` cellwise, anything else
/// as JSON.
pub fn diff_reports(a: &Path, b: &Path, tol: f64) -> CliResult<DiffReport> {
    if tol.is_nan() || tol < 0.0 {
        return Err(CliError::config("the tolerance must be nonnegative"));
    }
    let ext = |p: &Path| p.extension().map(|e| e.to_ascii_lowercase());
    if ext(a) != ext(b) {
        return Err(schema("the files have different formats"));
    }
    let (ta, tb) = (read(a)?, read(b)?);
    if ext(a).is_some_and(|e| e == "csv") {
        diff_csv(&ta, &tb, tol)
    } else {
        diff_json(&ta, &tb, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_and_perturbed_csv() {
        let a = "x,y\n1.0,a\n2.0,b\n";
        assert!(diff_csv(a, a, 0.0).unwrap().equal);
        let r = diff_csv(a, "x,y\n1.0,a\n2.1,b\n", 1e-3).unwrap();
        assert_eq!(r.divergent.len(), 1);
        assert_eq!(r.divergent[0].field, "row 1, x");
        assert!(diff_csv(a, "x,y\n1.0,a\n2.0000000001,b\n", 1e-6).unwrap().equal);
        assert!(diff_csv(a, "x,z\n1.0,a\n2.0,b\n", 0.0).is_err());
    }

    #[test]
    fn json_fields_are_listed_by_path() {
        let a = r#"{"schema": "s", "summary": {"v": [1.0, 2.0], "ok": true}}"#;
        let b = r#"{"schema": "s", "summary": {"v": [1.0, 2.5], "ok": false}}"#;
        let r = diff_json(a, b, 1e-12).unwrap();
        let fields: Vec<&str> = r.divergent.iter().map(|d| d.field.as_str()).collect();
        assert_eq!(fields, ["$.summary.v[1]", "$.summary.ok"]);
        assert!(diff_json(a, r#"{"schema": "t"}"#, 0.0).is_err());
    }
}
