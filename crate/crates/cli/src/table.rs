use std::io::Write;

use serde_json::{Map, Value};

use crate::config::Format;
use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(Option<f64>),
    Int(usize),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(Some(v)) => format!("{v:.16e}"),
            Cell::Num(None) => String::new(),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(Some(v)) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Num(None) => Value::Null,
            Cell::Int(n) => Value::from(*n),
            Cell::Text(s) => Value::from(s.as_str()),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => *v,
            Cell::Int(n) => Some(*n as f64),
            Cell::Text(_) => None,
        }
    }
}

/// One output row. Failures are collected in `errors` and rendered in the
/// trailing `error` column.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Row {
    pub cells: Vec<Cell>,
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl Row {
    pub fn num(&mut self, v: Option<f64>) {
        self.cells.push(Cell::Num(v));
    }

    /// Push the value, or record the error and leave the cell empty.
    pub fn try_num<E: std::fmt::Display>(&mut self, name: &str, r: Result<f64, E>) {
        match r {
            Ok(v) => self.num(Some(v)),
            Err(e) => {
                self.errors.push(format!("{name}: {e}"));
                self.num(None);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Column names, without the trailing `error` column.
    pub header: Vec<&'static str>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r.cells[i].as_f64()).collect())
    }

    pub fn failed(&self) -> usize {
        self.rows.iter().filter(|r| !r.errors.is_empty()).count()
    }

    /// Machine-readable summary of the rows that failed.
    pub fn error_summary(&self) -> Value {
        let errors: Vec<Value> = self
            .rows
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.errors.is_empty())
            .map(|(i, r)| {
                let mut m = Map::new();
                m.insert("row".into(), Value::from(i));
                for (h, c) in self.header.iter().zip(&r.cells).take(2) {
                    m.insert((*h).into(), c.json());
                }
                m.insert("error".into(), Value::from(r.errors.join("; ")));
                Value::Object(m)
            })
            .collect();
        serde_json::json!({ "failed_rows": errors.len(), "total_rows": self.rows.len(), "errors": errors })
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let mut m: Map<String, Value> =
                        self.header.iter().zip(&r.cells).map(|(h, c)| ((*h).to_string(), c.json())).collect();
                    let err = if r.errors.is_empty() { Value::Null } else { Value::from(r.errors.join("; ")) };
                    m.insert("error".into(), err);
                    Value::Object(m)
                })
                .collect(),
        )
    }

    pub fn write<W: Write>(&self, format: Format, mut w: W) -> CliResult<()> {
        match format {
            Format::Csv => {
                let mut out = csv::Writer::from_writer(w);
                out.write_record(self.header.iter().copied().chain(["error"]))?;
                for r in &self.rows {
                    out.write_record(r.cells.iter().map(Cell::csv).chain([r.errors.join("; ")]))?;
                }
                out.flush().map_err(|e| crate::error::CliError::Io("output".into(), e))?;
            }
            Format::Json => {
                serde_json::to_writer_pretty(&mut w, &self.to_json())?;
                writeln!(w).map_err(|e| crate::error::CliError::Io("output".into(), e))?;
            }
            Format::Text => {
                let body: Vec<Vec<String>> = self
                    .rows
                    .iter()
                    .map(|r| {
                        r.cells
                            .iter()
                            .map(|c| match c {
                                Cell::Num(Some(v)) => format!("{v:.10e}"),
                                Cell::Num(None) => "-".into(),
                                c => c.csv(),
                            })
                            .chain([if r.errors.is_empty() { "-".into() } else { r.errors.join("; ") }])
                            .collect()
                    })
                    .collect();
                let names: Vec<&str> = self.header.iter().copied().chain(["error"]).collect();
                let widths: Vec<usize> = (0..names.len())
                    .map(|i| body.iter().map(|r| r[i].len()).chain([names[i].len()]).max().unwrap_or(0))
                    .collect();
                let line = |cells: &[&str]| {
                    cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join("  ")
                };
                let io = |e| crate::error::CliError::Io("output".into(), e);
                writeln!(w, "{}", line(&names).trim_end()).map_err(io)?;
                for r in &body {
                    let cells: Vec<&str> = r.iter().map(String::as_str).collect();
                    writeln!(w, "{}", line(&cells).trim_end()).map_err(io)?;
                }
            }
        }
        Ok(())
    }
}
