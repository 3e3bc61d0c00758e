//! Output rendering: aligned text tables, CSV, JSON and (for the
//! dataset command) TOML, with optional `--out` redirection.
//!
//! Numeric formatting is fixed so identical invocations produce
//! byte-identical files: seconds with 3 decimals, minutes with 1
//! decimal, contention in scientific notation with 3 significant
//! digits.

use std::fs;
use std::path::Path;

use clap::ValueEnum;

use traincast_core::evaluate::round_tenth;

use crate::error::AppError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
    /// Dataset command only: the editable config schema.
    Toml,
}

/// Tabular output plus context lines. In table mode the preamble and
/// postscript surround the table on the output stream; in csv/json mode
/// they go to stderr so the payload stays machine-readable.
pub struct CommandOutput {
    pub preamble: Vec<String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub postscript: Vec<String>,
    pub json: serde_json::Value,
}

impl CommandOutput {
    pub fn new(columns: Vec<&'static str>, json: serde_json::Value) -> Self {
        CommandOutput {
            preamble: Vec::new(),
            columns,
            rows: Vec::new(),
            postscript: Vec::new(),
            json,
        }
    }

    fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    fn to_table(&self) -> String {
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.len()).collect();
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                widths[i] = widths[i].max(cell.len());
            }
        }
        let mut out = String::new();
        for line in &self.preamble {
            out.push_str(line);
            out.push('\n');
        }
        if !self.preamble.is_empty() {
            out.push('\n');
        }
        let render = |cells: Vec<&str>, out: &mut String| {
            let last = cells.len().saturating_sub(1);
            for (i, cell) in cells.iter().enumerate() {
                if i == last {
                    out.push_str(cell);
                } else {
                    out.push_str(&format!("{cell:<width$}  ", width = widths[i]));
                }
            }
            out.push('\n');
        };
        render(self.columns.to_vec(), &mut out);
        for row in &self.rows {
            render(row.iter().map(String::as_str).collect(), &mut out);
        }
        for line in &self.postscript {
            out.push('\n');
            out.push_str(line);
            out.push('\n');
        }
        out
    }

    fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.json).expect("serializable");
        text.push('\n');
        text
    }
}

fn side_channel(lines: &[String]) {
    for line in lines {
        eprintln!("{line}");
    }
}

/// Render to the requested format and write to stdout or `--out`.
pub fn emit(
    output: &CommandOutput,
    format: Format,
    out: Option<&Path>,
    toml_payload: Option<&str>,
) -> Result<(), AppError> {
    let rendered = match format {
        Format::Table => output.to_table(),
        Format::Csv => {
            side_channel(&output.preamble);
            side_channel(&output.postscript);
            output.to_csv()
        }
        Format::Json => {
            side_channel(&output.preamble);
            side_channel(&output.postscript);
            output.to_json()
        }
        Format::Toml => match toml_payload {
            Some(payload) => payload.to_string(),
            None => {
                return Err(AppError::validation(
                    "--format toml is only supported by the dataset command",
                ))
            }
        },
    };
    match out {
        Some(path) => fs::write(path, rendered).map_err(|e| AppError::write(path, e)),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}

pub fn fmt_seconds(value: f64) -> String {
    format!("{value:.3}")
}

pub fn fmt_minutes(value_minutes: f64) -> String {
    format!("{:.1}", round_tenth(value_minutes))
}

pub fn fmt_contention(value: f64) -> String {
    format!("{value:.2e}")
}
