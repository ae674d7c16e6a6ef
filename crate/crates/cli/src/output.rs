use std::io::Write;

use anyhow::Result;
use permoment::numbers::{format_rational, to_decimal};
use permoment::Rational;
use serde_json::{Map, Value};

use crate::args::Format;

/// A command result in all three renderings.
pub struct Output {
    pub json: Value,
    pub text: String,
    /// Rows for CSV; when absent the top-level scalars form one row.
    pub table: Option<Table>,
}

pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    /// Columns taken from the keys of the first object.
    pub fn from_objects(items: &[Value]) -> Table {
        let headers: Vec<String> = match items.first() {
            Some(Value::Object(m)) => m.keys().cloned().collect(),
            _ => Vec::new(),
        };
        let rows = items
            .iter()
            .map(|item| headers.iter().map(|h| cell(item.get(h).unwrap_or(&Value::Null))).collect())
            .collect();
        Table { headers, rows }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        other => other.to_string(),
    }
}

/// Renders exact values, with an approximation appended when asked.
#[derive(Clone, Copy)]
pub struct Numbers {
    pub decimal: Option<usize>,
}

impl Numbers {
    pub fn text(&self, q: &Rational) -> String {
        match self.decimal {
            Some(d) if !q.is_integer() => format!("{} (approx. {})", format_rational(q), to_decimal(q, d)),
            _ => format_rational(q),
        }
    }

    /// Adds `<key>Approx` beside an exact JSON field.
    pub fn annotate(&self, obj: &mut Map<String, Value>, key: &str, q: &Rational) {
        if let Some(d) = self.decimal {
            obj.insert(format!("{key}Approx"), Value::String(to_decimal(q, d)));
        }
    }
}

pub fn render(out: &Output, format: Format, w: &mut impl Write) -> Result<()> {
    match format {
        Format::Text => {
            w.write_all(out.text.as_bytes())?;
            if !out.text.ends_with('\n') {
                w.write_all(b"\n")?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, &out.json)?;
            w.write_all(b"\n")?;
        }
        Format::Csv => {
            let owned;
            let table = match &out.table {
                Some(t) => t,
                None => {
                    owned = scalar_row(&out.json);
                    &owned
                }
            };
            let mut csv = csv::Writer::from_writer(&mut *w);
            csv.write_record(&table.headers)?;
            for row in &table.rows {
                csv.write_record(row)?;
            }
            csv.flush()?;
        }
    }
    Ok(())
}

fn scalar_row(json: &Value) -> Table {
    match json {
        Value::Object(m) => Table {
            headers: m.keys().cloned().collect(),
            rows: vec![m.values().map(cell).collect()],
        },
        other => Table {
            headers: vec!["value".into()],
            rows: vec![vec![cell(other)]],
        },
    }
}
