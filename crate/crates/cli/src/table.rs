//! CSV serialization: scientific notation with 12 significant digits,
//! comma delimiter, LF line endings. Missing values are empty fields.

use std::io::Write;
use std::path::Path;

pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<Option<f64>>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: Vec<S>) -> Self {
        let header: Vec<String> = header.into_iter().map(Into::into).collect();
        assert!(!header.is_empty());
        Self { header, rows: Vec::new() }
    }

    pub fn push_row(&mut self, row: Vec<Option<f64>>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width {} does not match header width {}",
            row.len(),
            self.header.len()
        );
        self.rows.push(row);
    }

    pub fn extend_rows(&mut self, rows: Vec<Vec<Option<f64>>>) {
        for row in rows {
            self.push_row(row);
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::with_capacity(32 * self.header.len() * (self.rows.len() + 1));
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for cell in row {
                if !first {
                    out.push(',');
                }
                first = false;
                if let Some(v) = cell {
                    out.push_str(&format_sci(*v));
                }
            }
            out.push('\n');
        }
        out
    }

    /// Write the whole table in one shot: to the path when given, otherwise
    /// to stdout. Nothing is written until every row exists.
    pub fn write(&self, out: Option<&Path>) -> std::io::Result<()> {
        let rendered = self.render();
        match out {
            Some(path) => std::fs::write(path, rendered),
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                lock.write_all(rendered.as_bytes())
            }
        }
    }
}

/// 12 significant digits in scientific notation, e.g. `3.14159265359e0`.
pub fn format_sci(x: f64) -> String {
    format!("{x:.11e}")
}
