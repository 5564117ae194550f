//! Deterministic JSON and CSV writers. Every float is printed with 17
//! significant digits so values round-trip exactly.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{Number, Value};

use crate::error::{CliError, CliResult};

/// `x` with 17 significant digits in scientific notation; `nan`, `inf` and
/// `-inf` for non-finite values.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// JSON number carrying the 17-digit text verbatim; `null` if not finite.
pub fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&format_f64(x)).expect("formatted float is valid JSON"))
    } else {
        Value::Null
    }
}

pub fn json_array(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| json_f64(*x)).collect())
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(io_error(dir))
}

pub fn write_json(dir: &Path, name: &str, value: &Value) -> CliResult<PathBuf> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    fs::write(&path, text).map_err(io_error(&path))?;
    Ok(path)
}

/// A CSV table with a leading `# config_hash: ...` comment line.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|x| format_f64(*x)).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path, name: &str, config_hash: &str) -> CliResult<PathBuf> {
        let path = dir.join(name);
        let mut buf = Vec::new();
        writeln!(buf, "# config_hash: {config_hash}").expect("write to memory");
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            let to_io = |e: csv::Error| CliError::Io {
                path: path.clone(),
                source: std::io::Error::other(e.to_string()),
            };
            w.write_record(&self.header).map_err(to_io)?;
            for row in &self.rows {
                w.write_record(row).map_err(to_io)?;
            }
            w.flush().map_err(io_error(&path))?;
        }
        fs::write(&path, buf).map_err(io_error(&path))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_f64(1.0), "1.0000000000000000e0");
        assert_eq!(format_f64(-0.125), "-1.2500000000000000e-1");
        assert_eq!(format_f64(f64::NAN), "nan");
        assert_eq!(json_f64(f64::INFINITY), Value::Null);
        assert_eq!(serde_json::to_string(&json_f64(0.1)).unwrap(), "1.0000000000000001e-1");
    }

    proptest! {
        #[test]
        fn formatted_floats_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let s = format_f64(x);
            prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
            let json = serde_json::to_string(&json_f64(x)).unwrap();
            prop_assert_eq!(json.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
