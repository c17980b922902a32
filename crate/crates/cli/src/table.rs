//! Plain-text numeric tables.
//!
//! One header line `# name[unit],name[unit],...` followed by comma-separated
//! rows. Numbers are written with 17 significant digits, which round-trips
//! every `f64` exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    pub fn new(name: &str, unit: &str) -> Self {
        Self {
            name: name.to_string(),
            unit: unit.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
}

pub fn format_value(v: f64) -> String {
    format!("{:.16e}", v)
}

impl Table {
    /// Empty table with `(name, unit)` columns.
    pub fn new(columns: &[(&str, &str)]) -> Self {
        Self {
            columns: columns.iter().map(|(n, u)| Column::new(n, u)).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn render(&self) -> String {
        let mut out = String::from("# ");
        let header: Vec<String> = self
            .columns
            .iter()
            .map(|c| format!("{}[{}]", c.name, c.unit))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            for (i, &v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", format_value(v));
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render()).map_err(|e| CliError::io(path, e))
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, message: String| CliError::Format {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines();
        let header = lines
            .next()
            .and_then(|l| l.strip_prefix("# "))
            .ok_or_else(|| err(1, "missing `# ` header line".into()))?;
        let columns = header
            .split(',')
            .map(|field| {
                let (name, rest) = field
                    .split_once('[')
                    .ok_or_else(|| err(1, format!("column `{}` has no [unit]", field)))?;
                let unit = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(1, format!("column `{}` has no closing ]", field)))?;
                Ok(Column::new(name, unit))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let n = i + 2;
            let row = line
                .split(',')
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| err(n, format!("`{}` is not a number", s)))
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != columns.len() {
                return Err(err(
                    n,
                    format!("{} values, header has {} columns", row.len(), columns.len()),
                ));
            }
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut t = Table::new(&[("t", "time"), ("x", "length")]);
        t.push(vec![0.1, -1.0 / 3.0]);
        t.push(vec![f64::MIN_POSITIVE, 1e300]);
        t.push(vec![0.0, 2.0f64.sqrt()]);
        let text = t.render();
        assert!(text.starts_with("# t[time],x[length]\n"));
        let back = Table::parse(&text, Path::new("mem")).unwrap();
        assert_eq!(back.columns, t.columns);
        for (a, b) in back.rows.iter().flatten().zip(t.rows.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.render(), text);
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_value(0.1), "1.0000000000000001e-1");
        assert_eq!(format_value(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn malformed_input_reports_line() {
        let p = Path::new("bad.csv");
        assert!(Table::parse("t[time]\n1\n", p).is_err());
        assert!(Table::parse("# t\n1\n", p).is_err());
        let e = Table::parse("# t[time],x[length]\n1,2\n3\n", p).unwrap_err();
        assert!(e.to_string().contains("bad.csv:3"), "{}", e);
        let e = Table::parse("# t[time]\nabc\n", p).unwrap_err();
        assert!(e.to_string().contains(":2"), "{}", e);
    }
}
