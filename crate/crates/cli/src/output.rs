use instanton_core::format::{sig17, sig6};
use serde_json::Value;

use crate::args::Format;

/// One result in all three renderings.
pub struct Artifact {
    pub json: Value,
    pub csv: Table,
    pub table: Table,
}

impl Artifact {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("values serialize");
                s.push('\n');
                s
            }
            Format::Csv => self.csv.to_csv(),
            Format::Table => self.table.to_aligned(),
        }
    }
}

pub enum Cell {
    Text(String),
    Int(i64),
    Real(f64),
}

impl Cell {
    fn machine(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => sig17(*x),
        }
    }

    fn human(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => sig6(*x),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(b.to_string())
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Lines printed under an aligned table.
    pub footer: Vec<String>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            ..Self::default()
        }
    }

    /// Two columns, `quantity` and `value`.
    pub fn key_value(pairs: Vec<(&str, Cell)>) -> Self {
        let mut t = Self::new(&["quantity", "value"]);
        for (k, v) in pairs {
            t.push(vec![k.into(), v]);
        }
        t
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.headers.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(Cell::machine).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    /// Numbers right-aligned, text left-aligned.
    pub fn to_aligned(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::human).collect())
            .collect();
        let widths: Vec<usize> = (0..self.headers.len())
            .map(|c| {
                cells
                    .iter()
                    .map(|r| r[c].len())
                    .chain([self.headers[c].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |texts: Vec<(&str, bool)>| {
            let parts: Vec<String> = texts
                .iter()
                .zip(&widths)
                .map(|((t, numeric), &w)| {
                    if *numeric {
                        format!("{t:>w$}")
                    } else {
                        format!("{t:<w$}")
                    }
                })
                .collect();
            let mut s = parts.join("  ").trim_end().to_string();
            s.push('\n');
            s
        };
        let numeric: Vec<bool> = (0..self.headers.len())
            .map(|c| self.rows.iter().any(|r| !matches!(r[c], Cell::Text(_))))
            .collect();
        let mut out = line(self.headers.iter().map(String::as_str).zip(numeric.iter().copied()).collect());
        for row in &cells {
            out.push_str(&line(row.iter().map(String::as_str).zip(numeric.iter().copied()).collect()));
        }
        for f in &self.footer {
            out.push_str(f);
            out.push('\n');
        }
        out
    }
}
