//! Report tables and their Markdown, CSV and JSON renderings.

use std::fmt::Write as _;
use std::str::FromStr;

use decisive_core::field::Link;
use decisive_core::Error;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Md,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "md" => Ok(Format::Md),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other}; expected md, csv or json")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GlyphStyle {
    #[default]
    Unicode,
    Ascii,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Int(i64),
    /// Mean and standard deviation shown as "μ, σ".
    Pair(f64, f64),
    Glyph(Link),
    Text(String),
    Empty,
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Number(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Number)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub header: String,
    /// Digits after the decimal point for number cells.
    pub decimals: usize,
}

impl Column {
    pub fn new(header: &str, decimals: usize) -> Self {
        Self { header: header.to_string(), decimals }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub title: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl ReportTable {
    pub fn new(title: &str, columns: Vec<Column>) -> Self {
        Self { title: title.to_string(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    fn check(&self) -> Result<(), Error> {
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.columns.len() {
                return Err(Error::SchemaMismatch { row: i + 1, expected: self.columns.len(), got: row.len() });
            }
        }
        Ok(())
    }

    fn cell_text(&self, col: usize, cell: &Cell, glyphs: GlyphStyle) -> String {
        let d = self.columns[col].decimals;
        match cell {
            Cell::Number(v) => fixed(*v, d),
            Cell::Int(v) => v.to_string(),
            Cell::Pair(m, s) => format!("{}, {}", fixed(*m, d), fixed(*s, d)),
            Cell::Glyph(l) => match glyphs {
                GlyphStyle::Unicode => l.glyph().to_string(),
                GlyphStyle::Ascii => l.ascii().to_string(),
            },
            Cell::Text(t) => t.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn cell_json(&self, col: usize, cell: &Cell, glyphs: GlyphStyle) -> Value {
        let d = self.columns[col].decimals;
        let num = |v: f64| {
            let s = fixed(v, d);
            serde_json::from_str::<Value>(&s).unwrap_or(Value::String(s))
        };
        match cell {
            Cell::Number(v) => num(*v),
            Cell::Int(v) => json!(v),
            Cell::Pair(m, s) => json!([num(*m), num(*s)]),
            Cell::Empty => Value::Null,
            other => Value::String(self.cell_text(col, other, glyphs)),
        }
    }
}

/// Fixed-point rendering with negative zero folded to zero.
pub fn fixed(v: f64, decimals: usize) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "NaN".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn md_escape(s: &str) -> String {
    s.replace('|', "\\|")
}

pub fn render_table(table: &ReportTable, format: Format, glyphs: GlyphStyle) -> Result<String, Error> {
    table.check()?;
    let mut out = String::new();
    match format {
        Format::Md => {
            let _ = writeln!(out, "### {}\n", table.title);
            let headers: Vec<String> = table.columns.iter().map(|c| md_escape(&c.header)).collect();
            let _ = writeln!(out, "| {} |", headers.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(headers.len()));
            for row in &table.rows {
                let cells: Vec<String> = row
                    .iter()
                    .enumerate()
                    .map(|(i, c)| md_escape(&table.cell_text(i, c, glyphs)))
                    .collect();
                let _ = writeln!(out, "| {} |", cells.join(" | "));
            }
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
            w.write_record(table.columns.iter().map(|c| c.header.as_str())).map_err(csv_failure)?;
            for row in &table.rows {
                w.write_record(row.iter().enumerate().map(|(i, c)| table.cell_text(i, c, glyphs)))
                    .map_err(csv_failure)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
            out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
        }
        Format::Json => {
            let value = table_json(table, glyphs);
            out = serde_json::to_string_pretty(&value).expect("json value serializes");
            out.push('\n');
        }
    }
    Ok(out)
}

fn csv_failure(e: csv::Error) -> Error {
    Error::InvalidInput(e.to_string())
}

fn table_json(table: &ReportTable, glyphs: GlyphStyle) -> Value {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let obj: serde_json::Map<String, Value> = row
                .iter()
                .enumerate()
                .map(|(i, c)| (table.columns[i].header.clone(), table.cell_json(i, c, glyphs)))
                .collect();
            Value::Object(obj)
        })
        .collect();
    json!({
        "title": table.title,
        "columns": table.columns.iter().map(|c| c.header.clone()).collect::<Vec<_>>(),
        "rows": rows,
    })
}

/// Several tables as one document. CSV blocks are separated by a blank line and
/// introduced by a `# title` line; JSON becomes an array.
pub fn render_document(tables: &[ReportTable], format: Format, glyphs: GlyphStyle) -> Result<String, Error> {
    match format {
        Format::Json => {
            for t in tables {
                t.check()?;
            }
            let all: Vec<Value> = tables.iter().map(|t| table_json(t, glyphs)).collect();
            let mut s = serde_json::to_string_pretty(&all).expect("json value serializes");
            s.push('\n');
            Ok(s)
        }
        Format::Md => {
            let parts = tables
                .iter()
                .map(|t| render_table(t, format, glyphs))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(parts.join("\n"))
        }
        Format::Csv => {
            let parts = tables
                .iter()
                .map(|t| Ok(format!("# {}\n{}", t.title, render_table(t, format, glyphs)?)))
                .collect::<Result<Vec<_>, Error>>()?;
            Ok(parts.join("\n"))
        }
    }
}

/// Split a multi-table CSV document back into (title, body) blocks.
pub fn split_csv_document(text: &str) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for block in text.split("\n\n").filter(|b| !b.trim().is_empty()) {
        let (title, body) = match block.strip_prefix("# ") {
            Some(rest) => match rest.split_once('\n') {
                Some((t, b)) => (t.to_string(), b.to_string()),
                None => (rest.to_string(), String::new()),
            },
            None => (String::new(), block.to_string()),
        };
        out.push((title, if body.ends_with('\n') { body } else { body + "\n" }));
    }
    out
}
