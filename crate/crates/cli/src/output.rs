//! Rendering of result tables as aligned text, CSV or JSON.

use std::io::{self, Write};

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Text(String),
    Num(f64),
    Flag(bool),
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
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Flag(b)
    }
}

/// Rounds to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

fn num_text(x: f64, digits: usize) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e7).contains(&a) {
        let s = format!("{:.*e}", digits - 1, x);
        // drop trailing zeros in the mantissa
        match s.split_once('e') {
            Some((m, e)) if m.contains('.') => {
                format!("{}e{e}", m.trim_end_matches('0').trim_end_matches('.'))
            }
            _ => s,
        }
    } else {
        round_sig(x, digits).to_string()
    }
}

const FILE_DIGITS: usize = 12;
const TABLE_DIGITS: usize = 6;

impl Cell {
    fn text(&self, digits: usize) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Num(x) => num_text(*x, digits),
            Cell::Flag(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Num(x) => serde_json::Number::from_f64(round_sig(*x, FILE_DIGITS))
                .map(Value::Number)
                .unwrap_or(Value::Null),
            Cell::Flag(b) => Value::Bool(*b),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra top-level JSON fields, also listed under the text table.
    pub extra: Vec<(&'static str, Value)>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, format: Format, out: W) -> io::Result<()> {
        match format {
            Format::Table => self.write_text(out),
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|c| c.text(TABLE_DIGITS)).collect())
            .collect();
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, h)| {
                cells
                    .iter()
                    .map(|r| r[j].len())
                    .chain([h.len()])
                    .max()
                    .unwrap()
            })
            .collect();
        let line = |fields: Vec<&str>| {
            fields
                .iter()
                .zip(&widths)
                .map(|(f, w)| format!("{f:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        writeln!(out, "{}", line(self.columns.clone()))?;
        for r in &cells {
            writeln!(out, "{}", line(r.iter().map(String::as_str).collect()))?;
        }
        for (k, v) in &self.extra {
            writeln!(out, "{k}: {}", text_value(v))?;
        }
        Ok(())
    }

    fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|c| c.text(FILE_DIGITS)))?;
        }
        w.flush()
    }

    fn write_json<W: Write>(&self, mut out: W) -> io::Result<()> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(r)
                    .map(|(k, c)| (k.to_string(), c.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut top = Map::new();
        top.insert("rows".into(), Value::Array(rows));
        for (k, v) in &self.extra {
            top.insert(k.to_string(), v.clone());
        }
        serde_json::to_writer_pretty(&mut out, &Value::Object(top))?;
        writeln!(out)
    }
}

fn text_value(v: &Value) -> String {
    match v {
        Value::Number(n) => n
            .as_f64()
            .map(|x| num_text(x, TABLE_DIGITS))
            .unwrap_or_else(|| n.to_string()),
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(text_value).collect::<Vec<_>>().join(", "),
        Value::Null => "none".into(),
        other => other.to_string(),
    }
}

/// JSON number rounded like the file formats.
pub fn json_num(x: f64) -> Value {
    Cell::Num(x).json()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(round_sig(2.0 / 3.0, 12), 0.666666666667);
        assert_eq!(round_sig(2.0 / 3.0, 6), 0.666667);
        assert_eq!(round_sig(0.0, 6), 0.0);
        assert_eq!(round_sig(123456.789, 3), 123000.0);
    }

    #[test]
    fn tiny_values_use_exponent() {
        assert_eq!(num_text(2.855e-21, 6), "2.855e-21");
        assert_eq!(num_text(0.25, 6), "0.25");
        assert_eq!(num_text(1.0, 12), "1");
    }

    #[test]
    fn csv_has_header_and_lf() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["x".into(), 0.5.into()]);
        let mut buf = Vec::new();
        t.write(Format::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\nx,0.5\n");
    }

    #[test]
    fn json_keeps_column_order() {
        let mut t = Table::new(&["z", "a"]);
        t.push(vec![1.0.into(), true.into()]);
        let mut buf = Vec::new();
        t.write(Format::Json, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.find("\"z\"").unwrap() < s.find("\"a\"").unwrap());
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["rows"][0]["z"], Value::from(1.0));
    }
}
