//! `key = value` text reports.

use std::path::Path;

use ballistic::StepperReport;

use crate::error::{CliError, Result};
use crate::table::format_value;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    pub entries: Vec<(String, String)>,
}

impl KeyValues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn number(&mut self, key: &str, value: f64) -> &mut Self {
        self.entries.push((key.to_string(), format_value(value)));
        self
    }

    pub fn count(&mut self, key: &str, value: usize) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn text(&mut self, key: &str, value: &str) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{} = {}\n", k, v))
            .collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render()).map_err(|e| CliError::io(path, e))
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once(" = ").ok_or_else(|| CliError::Format {
                path: path.to_path_buf(),
                line: i + 1,
                message: "expected `key = value`".into(),
            })?;
            entries.push((k.to_string(), v.to_string()));
        }
        Ok(Self { entries })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }
}

pub fn stepper_report(report: &StepperReport<f64>) -> KeyValues {
    let mut kv = KeyValues::new();
    kv.count("macro_steps", report.macro_steps)
        .count("total_substeps", report.total_substeps)
        .number("max_courant", report.max_courant)
        .number("mass_drift", report.mass_drift)
        .number("boundary_leak", report.boundary_leak);
    kv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stepper_report_round_trips() {
        let r = StepperReport {
            macro_steps: 400,
            total_substeps: 412,
            max_courant: 0.399_999_999_7,
            mass_drift: 3.3e-16,
            boundary_leak: 0.0,
        };
        let kv = stepper_report(&r);
        let back = KeyValues::parse(&kv.render(), Path::new("r.txt")).unwrap();
        assert_eq!(back, kv);
        assert_eq!(back.get("total_substeps"), Some("412"));
        assert_eq!(
            back.get_f64("max_courant").unwrap().to_bits(),
            r.max_courant.to_bits()
        );
        assert!(KeyValues::parse("junk\n", Path::new("r.txt")).is_err());
    }
}
