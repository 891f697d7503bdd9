//! Report emission. Every value is a decimal string (no binary floats), so
//! CSV and JSON carry byte-identical fields and any language can re-parse
//! them exactly.

use std::io::Write;

use congamma_core::Result;

use crate::config::ReportFormat;

pub struct Report {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Report {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// The CSV header is emitted even for an empty report.
    pub fn emit(&self, format: ReportFormat, out: &mut dyn Write) -> Result<()> {
        match format {
            ReportFormat::Csv => {
                writeln!(out, "{}", self.columns.join(","))?;
                for row in &self.rows {
                    writeln!(out, "{}", row.join(","))?;
                }
            }
            ReportFormat::Json => {
                let objects: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let map: serde_json::Map<String, serde_json::Value> = self
                            .columns
                            .iter()
                            .zip(row)
                            .map(|(k, v)| (k.to_string(), serde_json::Value::String(v.clone())))
                            .collect();
                        serde_json::Value::Object(map)
                    })
                    .collect();
                let text = serde_json::to_string_pretty(&objects).expect("string-only values");
                writeln!(out, "{text}")?;
            }
        }
        Ok(())
    }
}

/// Shortest round-trip decimal form of an f64 input parameter.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}
