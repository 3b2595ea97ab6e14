//! CSV ingestion and the canonical writer.
//!
//! Dialect: comma separator, `"` quoting, UTF-8, mandatory header row.
//! Error rows are reported as physical line numbers (header = line 1).

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tabular::{Column, Dataset, Schema, VarKind, VariableSpec};

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

/// Loads a CSV file against a known schema. Extra columns are ignored;
/// empty strings and the missing label map to the missing category.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let headers = reader.headers()?.clone();
    let mut positions = Vec::with_capacity(schema.variables.len());
    for spec in &schema.variables {
        let pos = headers
            .iter()
            .position(|h| h == spec.name)
            .ok_or_else(|| Error::MissingColumn(spec.name.clone()))?;
        positions.push(pos);
    }

    let mut columns: Vec<Column> = schema
        .variables
        .iter()
        .map(|v| match v.kind {
            VarKind::Categorical => Column::Cat(Vec::new()),
            VarKind::Integer => Column::Int(Vec::new()),
        })
        .collect();

    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 2; // 1-based, counting the header line
        for ((spec, &pos), col) in schema.variables.iter().zip(&positions).zip(&mut columns) {
            let raw = record.get(pos).unwrap_or("");
            parse_cell(spec, raw, line, col)?;
        }
    }
    Dataset::new(schema.clone(), columns)
}

fn parse_cell(spec: &VariableSpec, raw: &str, line: usize, col: &mut Column) -> Result<()> {
    let is_missing = raw.is_empty() || raw == spec.missing_label;
    match (spec.kind, col) {
        (VarKind::Categorical, Column::Cat(vals)) => {
            if is_missing {
                match spec.missing_index() {
                    Some(idx) => vals.push(idx),
                    None => {
                        return Err(Error::CategoryUnknown {
                            row: line,
                            column: spec.name.clone(),
                            value: raw.to_string(),
                        })
                    }
                }
            } else {
                match spec.category_index(raw) {
                    Some(idx) => vals.push(idx),
                    None => {
                        return Err(Error::CategoryUnknown {
                            row: line,
                            column: spec.name.clone(),
                            value: raw.to_string(),
                        })
                    }
                }
            }
        }
        (VarKind::Integer, Column::Int(vals)) => {
            if is_missing {
                if !spec.missing {
                    return Err(Error::ParseError {
                        row: line,
                        column: spec.name.clone(),
                        value: raw.to_string(),
                    });
                }
                vals.push(None);
            } else {
                let v: i64 = raw.parse().map_err(|_| Error::ParseError {
                    row: line,
                    column: spec.name.clone(),
                    value: raw.to_string(),
                })?;
                vals.push(Some(v));
            }
        }
        _ => unreachable!("column storage matches schema kind"),
    }
    Ok(())
}

/// Writes a dataset in the canonical dialect, variables in schema order.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = write_csv_string(ds);
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_csv_string(ds: &Dataset) -> String {
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    let names: Vec<&str> = ds.schema().names();
    writer.write_record(&names).expect("header write");
    for row in 0..ds.n_rows() {
        let record: Vec<String> = (0..names.len())
            .map(|v| ds.cell_label(v, row))
            .collect();
        writer.write_record(&record).expect("row write");
    }
    String::from_utf8(writer.into_inner().expect("flush")).expect("utf-8")
}

/// Infers a schema from a CSV file: hinted columns become integer with the
/// observed min/max, all others categorical with lexicographically sorted
/// observed values.
pub fn infer_schema(path: impl AsRef<Path>, integer_hints: &BTreeSet<String>) -> Result<Schema> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();

    struct Acc {
        distinct: BTreeSet<String>,
        min: Option<i64>,
        max: Option<i64>,
        missing: bool,
    }
    let mut accs: Vec<Acc> = headers
        .iter()
        .map(|_| Acc {
            distinct: BTreeSet::new(),
            min: None,
            max: None,
            missing: false,
        })
        .collect();

    let mut n_rows = 0usize;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        n_rows += 1;
        let line = i + 2;
        for (j, header) in headers.iter().enumerate() {
            let raw = record.get(j).unwrap_or("");
            let acc = &mut accs[j];
            let is_missing = raw.is_empty() || raw == super::DEFAULT_MISSING_LABEL;
            if integer_hints.contains(header) {
                if is_missing {
                    acc.missing = true;
                } else {
                    let v: i64 = raw.parse().map_err(|_| Error::ParseError {
                        row: line,
                        column: header.clone(),
                        value: raw.to_string(),
                    })?;
                    acc.min = Some(acc.min.map_or(v, |m| m.min(v)));
                    acc.max = Some(acc.max.map_or(v, |m| m.max(v)));
                }
            } else if is_missing {
                acc.missing = true;
            } else {
                acc.distinct.insert(raw.to_string());
            }
        }
    }
    if n_rows == 0 {
        return Err(Error::EmptyData);
    }

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "inferred".to_string());
    let mut variables = Vec::with_capacity(headers.len());
    for (header, acc) in headers.iter().zip(accs) {
        if integer_hints.contains(header) {
            let (min, max) = match (acc.min, acc.max) {
                (Some(lo), Some(hi)) => (lo, hi),
                _ => return Err(Error::EmptyData), // hinted column entirely missing
            };
            let mut spec = VariableSpec::integer(header, min, max);
            if acc.missing {
                spec = spec.with_missing();
            }
            variables.push(spec);
        } else {
            let cats: Vec<&str> = acc.distinct.iter().map(String::as_str).collect();
            if cats.is_empty() && !acc.missing {
                return Err(Error::EmptyData);
            }
            let mut spec = VariableSpec::categorical(header, &cats);
            if acc.missing {
                spec = spec.with_missing();
            }
            variables.push(spec);
        }
    }
    Schema::new(&name, variables)
}
