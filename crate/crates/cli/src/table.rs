use std::fmt::Write as _;

use nads_core::Complex64;
use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

/// Round-trip exact, fixed-width scientific notation.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

/// A self-describing table: a `#` header block with the command and the
/// resolved scenario, then CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: String,
    /// Extra `key: value` lines for the header block.
    pub meta: Vec<(String, String)>,
    pub scenario: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &str, scenario: Value) -> Self {
        Table {
            command: command.to_string(),
            meta: Vec::new(),
            scenario,
            columns: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn column(&mut self, name: &str) -> &mut Self {
        self.columns.push(name.to_string());
        self
    }

    /// Adds `re_<name>` and `im_<name>`.
    pub fn complex_column(&mut self, name: &str) -> &mut Self {
        self.column(&format!("re_{name}")).column(&format!("im_{name}"))
    }

    pub fn push_row(&mut self, row: Row) {
        assert_eq!(row.0.len(), self.columns.len(), "row width");
        self.rows.push(row.0);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of one column; text cells read as NaN.
    pub fn numbers(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.column_index(name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match r[j] {
                    Cell::Num(v) => v,
                    Cell::Text(_) => f64::NAN,
                })
                .collect(),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# nads {}", self.command).unwrap();
        for (k, v) in &self.meta {
            writeln!(out, "# {k}: {v}").unwrap();
        }
        writeln!(out, "# scenario:").unwrap();
        let pretty = serde_json::to_string_pretty(&self.scenario).expect("scenario serializes");
        for line in pretty.lines() {
            writeln!(out, "# {line}").unwrap();
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| match c {
                Cell::Num(v) => format_number(*v),
                Cell::Text(s) => s.clone(),
            }))
            .expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf-8"));
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<Value>> = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|c| match c {
                        Cell::Num(v) => json!(v),
                        Cell::Text(s) => json!(s),
                    })
                    .collect()
            })
            .collect();
        let meta: serde_json::Map<String, Value> = self.meta.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let doc = json!({
            "command": self.command,
            "meta": meta,
            "scenario": self.scenario,
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Default)]
pub struct Row(Vec<Cell>);

impl Row {
    pub fn new() -> Self {
        Row::default()
    }

    pub fn num(mut self, v: f64) -> Self {
        self.0.push(Cell::Num(v));
        self
    }

    pub fn complex(self, z: Complex64) -> Self {
        self.num(z.re).num(z.im)
    }

    pub fn text(mut self, s: impl Into<String>) -> Self {
        self.0.push(Cell::Text(s.into()));
        self
    }
}
