use std::fmt::Write;

use crate::config::Format;

/// Rows of preformatted cells under a header.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// `comment` goes on a leading `#` line in CSV and is dropped in the
    /// aligned layout.
    pub fn render(&self, format: Format, comment: &str) -> String {
        let mut out = String::new();
        match format {
            Format::Csv => {
                writeln!(out, "# {comment}").unwrap();
                writeln!(out, "{}", self.header.join(",")).unwrap();
                for r in &self.rows {
                    writeln!(out, "{}", r.join(",")).unwrap();
                }
            }
            Format::Table => {
                let widths: Vec<usize> = (0..self.header.len())
                    .map(|c| self.rows.iter().map(|r| r[c].len()).chain([self.header[c].len()]).max().unwrap())
                    .collect();
                let line = |cells: &[String]| {
                    cells.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect::<Vec<_>>().join("  ")
                };
                writeln!(out, "{}", line(&self.header)).unwrap();
                for r in &self.rows {
                    writeln!(out, "{}", line(r)).unwrap();
                }
            }
        }
        out
    }
}

pub fn fixed(v: f64) -> String {
    format!("{v:.8}")
}

pub fn sci(v: f64) -> String {
    format!("{v:.2e}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(fixed).unwrap_or_else(|| "n.a.".into())
}
