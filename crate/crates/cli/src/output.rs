//! CSV and JSON writers.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::sweep::{Quantity, Row};
use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Fixed-width scientific notation with 15 significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.14e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_default()
}

pub fn open(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match out {
        Some(path) => {
            let f = File::create(path).map_err(|e| Failure::usage(format!("cannot create {}: {e}", path.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

pub fn columns(q: Quantity) -> Vec<&'static str> {
    let mut cols = q.inputs().to_vec();
    cols.extend(["variant", "value", "lower", "upper"]);
    if q.has_general_ref() {
        cols.push("general_ref");
    }
    cols.extend(["unit", "seconds", "note", "error"]);
    cols
}

struct Cells<'a> {
    row: &'a Row,
    scale: f64,
    unit: &'static str,
}

impl Cells<'_> {
    fn text(&self, col: &str) -> String {
        let r = self.row;
        let i = &r.inputs;
        match col {
            "eps0" => sci(i.eps0),
            "n" => i.n.to_string(),
            "delta" => opt(i.delta),
            "alpha" => opt(i.alpha),
            "k" => i.k.map(|k| k.to_string()).unwrap_or_default(),
            "T" => i.t.map(|t| t.to_string()).unwrap_or_default(),
            "variant" => r.variant.clone(),
            "value" => opt(r.value.map(|v| v * self.scale)),
            "lower" => opt(r.lower.map(|v| v * self.scale)),
            "upper" => opt(r.upper.map(|v| v * self.scale)),
            "general_ref" => opt(r.general_ref.map(|v| v * self.scale)),
            "unit" => self.unit.to_string(),
            "seconds" => format!("{:.3}", r.seconds),
            "note" => r.note.clone(),
            "error" => r.error.as_ref().map(|e| e.message.clone()).unwrap_or_default(),
            _ => unreachable!("unknown column {col}"),
        }
    }

    fn json(&self, col: &str) -> Value {
        let r = self.row;
        let i = &r.inputs;
        let num = |x: Option<f64>| x.map_or(Value::Null, |v| json!(v));
        match col {
            "eps0" => json!(i.eps0),
            "n" => json!(i.n),
            "delta" => num(i.delta),
            "alpha" => num(i.alpha),
            "k" => i.k.map_or(Value::Null, |k| json!(k)),
            "T" => i.t.map_or(Value::Null, |t| json!(t)),
            "value" => num(r.value.map(|v| v * self.scale)),
            "lower" => num(r.lower.map(|v| v * self.scale)),
            "upper" => num(r.upper.map(|v| v * self.scale)),
            "general_ref" => num(r.general_ref.map(|v| v * self.scale)),
            "seconds" => json!(r.seconds),
            "error" => r.error.as_ref().map_or(Value::Null, |e| json!(e.message)),
            other => json!(self.text(other)),
        }
    }
}

/// Writes `rows`; `base2` converts divergence values from nats to bits.
pub fn write_rows(w: &mut dyn Write, q: Quantity, rows: &[Row], format: Format, base2: bool) -> Result<(), Failure> {
    let (scale, unit) = if base2 { (1.0 / std::f64::consts::LN_2, "bits") } else { (1.0, "nats") };
    let cols = columns(q);
    let io_err = |e: io::Error| Failure::usage(format!("write failed: {e}"));
    match format {
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(&mut *w);
            csv.write_record(&cols).map_err(|e| Failure::usage(e.to_string()))?;
            for row in rows {
                let cells = Cells { row, scale, unit };
                csv.write_record(cols.iter().map(|c| cells.text(c)))
                    .map_err(|e| Failure::usage(e.to_string()))?;
            }
            csv.flush().map_err(io_err)?;
        }
        Format::Json => {
            let records: Vec<Value> = rows
                .iter()
                .map(|row| {
                    let cells = Cells { row, scale, unit };
                    Value::Object(cols.iter().map(|c| (c.to_string(), cells.json(c))).collect::<Map<_, _>>())
                })
                .collect();
            serde_json::to_writer_pretty(&mut *w, &records).map_err(|e| Failure::usage(e.to_string()))?;
            writeln!(w).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scientific_cells_keep_fifteen_digits() {
        assert_eq!(sci(0.1), "1.00000000000000e-1");
        assert_eq!(sci(0.0), "0.00000000000000e0");
        assert_eq!(sci(1.0 / 3.0).parse::<f64>().unwrap(), 0.333333333333333);
    }

    #[test]
    fn column_sets_are_fixed_per_quantity() {
        assert_eq!(columns(Quantity::RdpEps)[..4], ["eps0", "n", "alpha", "variant"]);
        assert!(columns(Quantity::Krr).contains(&"general_ref"));
        assert!(!columns(Quantity::AdpEps).contains(&"general_ref"));
        assert_eq!(*columns(Quantity::Compose).last().unwrap(), "error");
    }
}
