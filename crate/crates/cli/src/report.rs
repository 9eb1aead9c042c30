//! Tabular reports and their CSV/JSON encodings.

use std::io::Write;
use std::path::Path;

use crate::config::Format;
use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i128),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i128)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v as i128)
    }
}

impl From<u128> for Value {
    fn from(v: u128) -> Self {
        i128::try_from(v).map_or_else(|_| Value::Text(v.to_string()), Value::Int)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i128)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_owned())
    }
}

/// 17 significant digits, so every finite `f64` parses back to itself.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

impl Value {
    fn csv_field(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Float(v) => format_float(*v),
            Value::Text(s) => s.clone(),
            Value::Bool(b) => b.to_string(),
        }
    }

    pub fn json(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Float(v) if v.is_finite() => format_float(*v),
            Value::Float(_) => "null".into(),
            Value::Text(s) => serde_json::to_string(s).expect("string encodes"),
            Value::Bool(b) => b.to_string(),
        }
    }
}

pub type ReportRow = Vec<Value>;

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub columns: Vec<String>,
    pub rows: Vec<ReportRow>,
    /// Set when production stopped early; rendered after the rows.
    pub error: Option<String>,
}

impl Report {
    pub fn new(columns: &[&str]) -> Self {
        Report {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            error: None,
        }
    }

    pub fn push(&mut self, row: ReportRow) {
        assert_eq!(row.len(), self.columns.len(), "row arity");
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> CliResult<Vec<u8>> {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => Ok(self.render_json().into_bytes()),
        }
    }

    fn render_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let to_err = |e: csv::Error| CliError::Usage(format!("csv encoding: {e}"));
        w.write_record(&self.columns).map_err(to_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Value::csv_field)).map_err(to_err)?;
        }
        let mut out = w.into_inner().map_err(|e| CliError::Usage(format!("csv encoding: {e}")))?;
        if let Some(msg) = &self.error {
            out.extend_from_slice(format!("# error: {}\n", msg.replace('\n', " ")).as_bytes());
        }
        Ok(out)
    }

    fn render_json(&self) -> String {
        let mut items: Vec<String> = self
            .rows
            .iter()
            .map(|row| {
                let fields: Vec<String> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| format!("{}: {}", Value::from(c.as_str()).json(), v.json()))
                    .collect();
                format!("{{{}}}", fields.join(", "))
            })
            .collect();
        if let Some(msg) = &self.error {
            items.push(format!("{{\"error\": {}}}", Value::from(msg.as_str()).json()));
        }
        if items.is_empty() {
            "[]\n".into()
        } else {
            format!("[\n  {}\n]\n", items.join(",\n  "))
        }
    }
}

/// Writes `bytes` to `path`, or to standard output when `path` is `None`.
pub fn write_output(bytes: &[u8], path: Option<&Path>) -> CliResult<u64> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::io(p, e))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io("<stdout>", e))?
        }
    }
    Ok(bytes.len() as u64)
}

/// Renders and writes a report; returns the byte count.
pub fn emit_report(report: &Report, format: Format, path: Option<&Path>, allow_empty: bool) -> CliResult<u64> {
    if report.rows.is_empty() && !allow_empty && report.error.is_none() {
        return Err(CliError::Usage("report has no rows".into()));
    }
    write_output(&report.render(format)?, path)
}

/// Reads a CSV report back as strings (header first).
pub fn parse_csv(bytes: &[u8]) -> CliResult<Vec<Vec<String>>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .from_reader(bytes);
    r.records()
        .map(|rec| {
            rec.map(|r| r.iter().map(str::to_owned).collect())
                .map_err(|e| CliError::Usage(format!("csv decoding: {e}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new(&["name", "x", "n", "ok"]);
        r.push(vec!["a,\"b\"".into(), 0.1f64.into(), 7u64.into(), true.into()]);
        r.push(vec!["plain".into(), (-1.0e-300f64).into(), (-3i64).into(), false.into()]);
        r
    }

    #[test]
    fn empty_csv_is_header_only() {
        let r = Report::new(&["a", "b"]);
        assert_eq!(r.render(Format::Csv).unwrap(), b"a,b\n");
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.csv");
        assert!(emit_report(&r, Format::Csv, Some(&p), false).is_err());
        assert_eq!(emit_report(&r, Format::Csv, Some(&p), true).unwrap(), 4);
    }

    #[test]
    fn json_has_one_object_per_row() {
        let text = String::from_utf8(sample().render(Format::Json).unwrap()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let arr = v.as_array().unwrap();
        assert_eq!(arr.len(), 2);
        assert_eq!(arr[0]["name"], "a,\"b\"");
        assert_eq!(arr[1]["n"], -3);
        let keys: Vec<&String> = arr[0].as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 4);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let r = sample();
        let rows = parse_csv(&r.render(Format::Csv).unwrap()).unwrap();
        assert_eq!(rows[0], vec!["name", "x", "n", "ok"]);
        assert_eq!(rows[1][0], "a,\"b\"");
        assert_eq!(rows[1][1].parse::<f64>().unwrap(), 0.1);
        assert_eq!(rows[2][1].parse::<f64>().unwrap(), -1.0e-300);
        for x in [1.0 / 3.0, f64::MIN_POSITIVE, 1.0e308, -2.5e-7, 123_456_789.123_456_79] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn trailing_error_record() {
        let mut r = sample();
        r.error = Some("budget".into());
        let csv = String::from_utf8(r.render(Format::Csv).unwrap()).unwrap();
        assert!(csv.ends_with("# error: budget\n"));
        assert_eq!(parse_csv(csv.as_bytes()).unwrap().len(), 3);
        let v: serde_json::Value = serde_json::from_slice(&r.render(Format::Json).unwrap()).unwrap();
        assert_eq!(v.as_array().unwrap().last().unwrap()["error"], "budget");
    }
}
