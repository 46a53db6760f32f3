//! Number formatting and emission. Every number leaving the program passes
//! through here and is rejected if it is not finite.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;
use xyqmc::linalg::{Mat2, C64};

use crate::error::{CliError, Result};

/// 17 significant digits in scientific notation.
pub fn number(x: f64, what: &str) -> Result<String> {
    if x.is_finite() {
        Ok(format!("{x:.16e}"))
    } else {
        Err(CliError::NonFinite(what.to_string()))
    }
}

pub fn complex(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// `[[[re, im], [re, im]], [[re, im], [re, im]]]`, row major.
pub fn matrix(m: &Mat2) -> [[[f64; 2]; 2]; 2] {
    [[complex(m[(0, 0)]), complex(m[(0, 1)])], [complex(m[(1, 0)]), complex(m[(1, 1)])]]
}

pub struct CsvTable {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&'static str]) -> Self {
        CsvTable {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, out: &mut dyn Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_finite(v: &Value, path: &mut String) -> Result<()> {
    match v {
        // serde_json turns NaN and ±inf into null; nothing else here emits null
        Value::Null => Err(CliError::NonFinite(path.clone())),
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                let len = path.len();
                path.push_str(&format!("[{i}]"));
                check_finite(item, path)?;
                path.truncate(len);
            }
            Ok(())
        }
        Value::Object(map) => {
            for (k, item) in map {
                let len = path.len();
                path.push('.');
                path.push_str(k);
                check_finite(item, path)?;
                path.truncate(len);
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

/// One compact JSON document per line.
pub fn write_json_lines<T: Serialize>(out: &mut dyn Write, records: &[T]) -> Result<()> {
    for record in records {
        let value = serde_json::to_value(record)?;
        check_finite(&value, &mut String::new())?;
        serde_json::to_writer(&mut *out, &value)?;
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [1.0 / 3.0, 1.735_123_6, -2.5e-300, 0.0] {
            let s = number(x, "x").unwrap();
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(number(1.0, "x").unwrap(), "1.0000000000000000e0");
        assert!(number(f64::NAN, "x").is_err());
        assert!(number(f64::INFINITY, "x").is_err());
    }

    #[test]
    fn json_rejects_non_finite() {
        #[derive(Serialize)]
        struct R {
            a: Vec<f64>,
        }
        let mut buf = Vec::new();
        let err = write_json_lines(&mut buf, &[R { a: vec![1.0, f64::NAN] }]).unwrap_err();
        assert!(matches!(err, CliError::NonFinite(ref p) if p == ".a[1]"));
        write_json_lines(&mut buf, &[R { a: vec![1.0] }]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "{\"a\":[1.0]}\n");
    }
}
