//! CSV emission and ingestion.
//!
//! Output has a header `x1..xk,y`. Reals use Rust's shortest round-trip formatting,
//! categories are bare integers and missing values are empty fields.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::generator::{FeatureValue, Instance, Label, StreamGenerator};
use crate::scalar::Real;

pub const LABEL_COLUMN: &str = "y";

pub fn header(n_features: usize) -> Vec<String> {
    (1..=n_features)
        .map(|i| format!("x{i}"))
        .chain(std::iter::once(LABEL_COLUMN.to_string()))
        .collect()
}

fn record<F: Real>(inst: &Instance<F>) -> Vec<String> {
    let mut out: Vec<String> = inst
        .features
        .iter()
        .map(|f| match f {
            FeatureValue::Real(v) => v.to_string(),
            FeatureValue::Category(c) => c.to_string(),
            FeatureValue::Missing => String::new(),
        })
        .collect();
    out.push(match inst.label {
        Label::Class(c) => c.to_string(),
        Label::Value(v) => v.to_string(),
    });
    out
}

/// Writes instances as CSV. `n_features` fixes the header width.
pub fn write_instances<F: Real, W: Write>(
    out: W,
    n_features: usize,
    rows: impl IntoIterator<Item = Result<Instance<F>>>,
) -> Result<u64> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(n_features))?;
    let mut n = 0;
    for r in rows {
        let inst = r?;
        if inst.features.len() != n_features {
            return Err(Error::Arity {
                expected: n_features,
                got: inst.features.len(),
            });
        }
        w.write_record(record(&inst))?;
        n += 1;
    }
    w.flush()?;
    Ok(n)
}

/// Drains a generator into a CSV writer.
pub fn write_stream<F: Real, W: Write>(out: W, generator: &mut StreamGenerator<F>) -> Result<u64> {
    let k = generator.emitted_nodes().len();
    write_instances(out, k, generator)
}

/// A headered numeric table. `None` marks an empty field.
#[derive(Debug, Clone, PartialEq)]
pub struct Table<F> {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<F>>>,
}

impl<F: Real> Table<F> {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// One column with missing entries replaced by the column mean.
    pub fn column_imputed(&self, j: usize) -> Result<Vec<F>> {
        let seen: Vec<F> = self.rows.iter().filter_map(|r| r[j]).collect();
        if seen.is_empty() {
            return Err(Error::Csv(format!("column `{}` has no values", self.columns[j])));
        }
        let mean = seen.iter().copied().fold(F::zero(), |a, b| a + b) / F::from_count(seen.len());
        Ok(self.rows.iter().map(|r| r[j].unwrap_or(mean)).collect())
    }

    /// Row-major matrix of all columns with mean imputation.
    pub fn matrix_imputed(&self) -> Result<Vec<Vec<F>>> {
        let cols = (0..self.columns.len())
            .map(|j| self.column_imputed(j))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..self.n_rows())
            .map(|i| cols.iter().map(|c| c[i]).collect())
            .collect())
    }
}

pub fn read_table<F: Real, R: Read>(input: R) -> Result<Table<F>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let columns: Vec<String> = rd.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if columns.is_empty() || columns.iter().all(String::is_empty) {
        return Err(Error::Csv("missing header".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        if rec.len() != columns.len() {
            return Err(Error::Csv(format!(
                "row {} has {} fields, expected {}",
                i + 1,
                rec.len(),
                columns.len()
            )));
        }
        let row = rec
            .iter()
            .map(|s| {
                let s = s.trim();
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse::<f64>()
                        .ok()
                        .and_then(F::from_f64)
                        .filter(|v| v.is_finite())
                        .map(Some)
                        .ok_or_else(|| Error::Csv(format!("row {}: `{s}` is not a finite number", i + 1)))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

pub fn read_table_path<F: Real>(path: &Path) -> Result<Table<F>> {
    read_table(std::fs::File::open(path)?)
}

/// Rebuilds instances from a table whose last column is the label. Used to evaluate
/// learners on CSV input; `classification` decides how the label is read.
pub fn table_instances<F: Real>(table: &Table<F>, classification: bool) -> Result<Vec<Instance<F>>> {
    let k = table
        .columns
        .len()
        .checked_sub(1)
        .ok_or_else(|| Error::Csv("no label column".into()))?;
    table
        .rows
        .iter()
        .enumerate()
        .map(|(t, r)| {
            let y = r[k].ok_or_else(|| Error::Csv(format!("row {}: missing label", t + 1)))?;
            let label = if classification {
                let c = y
                    .to_usize()
                    .filter(|c| F::from_count(*c) == y)
                    .ok_or_else(|| Error::Csv(format!("row {}: label {y} is not a class index", t + 1)))?;
                Label::Class(c)
            } else {
                Label::Value(y)
            };
            Ok(Instance {
                t: t as u64,
                features: r[..k]
                    .iter()
                    .map(|v| v.map_or(FeatureValue::Missing, FeatureValue::Real))
                    .collect(),
                label,
                meta: Default::default(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(features: Vec<FeatureValue<f64>>, label: Label<f64>) -> Result<Instance<f64>> {
        Ok(Instance {
            t: 0,
            features,
            label,
            meta: Default::default(),
        })
    }

    #[test]
    fn formatting() {
        let mut buf = Vec::new();
        write_instances(
            &mut buf,
            3,
            vec![inst(
                vec![FeatureValue::Real(0.1), FeatureValue::Missing, FeatureValue::Category(2)],
                Label::Class(1),
            )],
        )
        .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x1,x2,x3,y\n0.1,,2,1\n");
    }

    #[test]
    fn round_trip_reals() {
        let vals = [1.0 / 3.0, -2.5e-12, 123456.789, f64::MIN_POSITIVE];
        let mut buf = Vec::new();
        let rows = vals
            .iter()
            .map(|&v| inst(vec![FeatureValue::Real(v)], Label::Value(-v)))
            .collect::<Vec<_>>();
        write_instances(&mut buf, 1, rows).unwrap();
        let t: Table<f64> = read_table(buf.as_slice()).unwrap();
        for (r, v) in t.rows.iter().zip(vals) {
            assert_eq!(r[0], Some(v));
            assert_eq!(r[1], Some(-v));
        }
    }

    #[test]
    fn malformed_input() {
        assert!(read_table::<f64, _>("a,b\n1,x\n".as_bytes()).is_err());
        assert!(read_table::<f64, _>("a,b\n1\n".as_bytes()).is_err());
        let t: Table<f64> = read_table("a,y\n,1\n3,0\n".as_bytes()).unwrap();
        assert_eq!(t.column_imputed(0).unwrap(), vec![3.0, 3.0]);
        let inst = table_instances(&t, true).unwrap();
        assert!(inst[0].features[0].is_missing());
        assert_eq!(inst[1].label, Label::Class(0));
        let bad: Table<f64> = read_table("a,y\n1,0.5\n".as_bytes()).unwrap();
        assert!(table_instances(&bad, true).is_err());
    }
}
