//! Typed tabular data model shared by every metric module.
//!
//! A [`Dataset`] stores columns as category indexes (categorical variables)
//! or optional integers (integer variables). Missing values are first-class:
//! a categorical missing is just another category (the schema's
//! `missing_label`, `"NA"` by default) and an integer missing is `None`.
//! Datasets are immutable after construction.

mod crosstab;
mod csv_io;
mod design;

pub use crosstab::{cell_part_label, crosstab, BinPolicy, CellPart, ContingencyTable};
pub use csv_io::{infer_schema, load_csv, write_csv, write_csv_string};
pub use design::{build_design, onehot_design, ColumnKind, DesignMatrix, Response};

use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::error::{Error, Result};

pub const DEFAULT_MISSING_LABEL: &str = "NA";

fn default_missing_label() -> String {
    DEFAULT_MISSING_LABEL.to_string()
}

fn is_default_missing_label(s: &str) -> bool {
    s == DEFAULT_MISSING_LABEL
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Categorical,
    Integer,
}

/// One column of the schema: a categorical variable with an ordered category
/// list, or an integer variable with an inclusive range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub kind: VarKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<i64>,
    #[serde(default)]
    pub missing: bool,
    #[serde(
        default = "default_missing_label",
        skip_serializing_if = "is_default_missing_label"
    )]
    pub missing_label: String,
}

impl VariableSpec {
    pub fn categorical(name: &str, categories: &[&str]) -> Self {
        VariableSpec {
            name: name.to_string(),
            kind: VarKind::Categorical,
            categories: Some(categories.iter().map(|s| s.to_string()).collect()),
            min: None,
            max: None,
            missing: false,
            missing_label: default_missing_label(),
        }
    }

    pub fn integer(name: &str, min: i64, max: i64) -> Self {
        VariableSpec {
            name: name.to_string(),
            kind: VarKind::Integer,
            categories: None,
            min: Some(min),
            max: Some(max),
            missing: false,
            missing_label: default_missing_label(),
        }
    }

    pub fn with_missing(mut self) -> Self {
        self.missing = true;
        if self.kind == VarKind::Categorical {
            let label = self.missing_label.clone();
            let cats = self.categories.get_or_insert_with(Vec::new);
            if !cats.iter().any(|c| *c == label) {
                cats.push(label);
            }
        }
        self
    }

    pub fn categories(&self) -> &[String] {
        self.categories.as_deref().unwrap_or(&[])
    }

    pub fn category_index(&self, label: &str) -> Option<u32> {
        self.categories()
            .iter()
            .position(|c| c == label)
            .map(|i| i as u32)
    }

    /// Index of the missing category, if missing values are permitted.
    pub fn missing_index(&self) -> Option<u32> {
        if self.missing && self.kind == VarKind::Categorical {
            self.category_index(&self.missing_label)
        } else {
            None
        }
    }

    fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::InvalidSchema("empty variable name".into()));
        }
        match self.kind {
            VarKind::Categorical => {
                let cats = self
                    .categories
                    .as_ref()
                    .ok_or_else(|| Error::InvalidSchema(format!("{}: no categories", self.name)))?;
                if cats.is_empty() {
                    return Err(Error::InvalidSchema(format!("{}: no categories", self.name)));
                }
                let mut seen = HashSet::new();
                for c in cats {
                    if !seen.insert(c) {
                        return Err(Error::InvalidSchema(format!(
                            "{}: duplicate category {c:?}",
                            self.name
                        )));
                    }
                }
                let has_label = cats.iter().any(|c| *c == self.missing_label);
                if self.missing != has_label {
                    return Err(Error::InvalidSchema(format!(
                        "{}: missing_label must appear in categories iff missing values are permitted",
                        self.name
                    )));
                }
            }
            VarKind::Integer => {
                let (min, max) = (self.min, self.max);
                match (min, max) {
                    (Some(lo), Some(hi)) if lo <= hi => {}
                    _ => {
                        return Err(Error::InvalidSchema(format!(
                            "{}: integer variable needs min <= max",
                            self.name
                        )))
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub dataset_name: String,
    pub variables: Vec<VariableSpec>,
}

impl Schema {
    pub fn new(dataset_name: &str, variables: Vec<VariableSpec>) -> Result<Self> {
        let schema = Schema {
            dataset_name: dataset_name.to_string(),
            variables,
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        if self.variables.is_empty() {
            return Err(Error::InvalidSchema("schema has no variables".into()));
        }
        let mut names = HashSet::new();
        for v in &self.variables {
            v.validate()?;
            if !names.insert(v.name.as_str()) {
                return Err(Error::InvalidSchema(format!(
                    "duplicate variable name {:?}",
                    v.name
                )));
            }
        }
        Ok(())
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn var(&self, name: &str) -> Result<&VariableSpec> {
        Ok(&self.variables[self.var_index(name)?])
    }

    pub fn names(&self) -> Vec<&str> {
        self.variables.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut schema: Schema = serde_json::from_str(text)?;
        // A schema file may declare missing=true without listing the label.
        for v in &mut schema.variables {
            if v.missing && v.kind == VarKind::Categorical {
                let label = v.missing_label.clone();
                if let Some(cats) = &mut v.categories {
                    if !cats.iter().any(|c| *c == label) {
                        cats.push(label);
                    }
                }
            }
        }
        schema.validate()?;
        Ok(schema)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serialization")
    }
}

/// Column storage: category indexes or optional integers.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Cat(Vec<u32>),
    Int(Vec<Option<i64>>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Cat(v) => v.len(),
            Column::Int(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Sentinel used when packing an integer missing into an `i64` record key.
pub(crate) const MISSING_KEY: i64 = i64::MIN;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Schema,
    columns: Vec<Column>,
    n_rows: usize,
}

impl Dataset {
    pub fn new(schema: Schema, columns: Vec<Column>) -> Result<Self> {
        schema.validate()?;
        if columns.len() != schema.variables.len() {
            return Err(Error::InvalidSchema(format!(
                "expected {} columns, got {}",
                schema.variables.len(),
                columns.len()
            )));
        }
        let n_rows = columns.first().map(Column::len).unwrap_or(0);
        for (spec, col) in schema.variables.iter().zip(&columns) {
            if col.len() != n_rows {
                return Err(Error::InvalidSchema(format!(
                    "column {} has length {}, expected {n_rows}",
                    spec.name,
                    col.len()
                )));
            }
            match (spec.kind, col) {
                (VarKind::Categorical, Column::Cat(vals)) => {
                    let k = spec.categories().len() as u32;
                    if let Some(bad) = vals.iter().find(|&&v| v >= k) {
                        return Err(Error::InvalidSchema(format!(
                            "column {}: category index {bad} out of range",
                            spec.name
                        )));
                    }
                }
                (VarKind::Integer, Column::Int(vals)) => {
                    let (lo, hi) = (spec.min.unwrap(), spec.max.unwrap());
                    for v in vals {
                        match v {
                            Some(x) if *x < lo || *x > hi => {
                                return Err(Error::InvalidSchema(format!(
                                    "column {}: value {x} outside [{lo},{hi}]",
                                    spec.name
                                )))
                            }
                            None if !spec.missing => {
                                return Err(Error::InvalidSchema(format!(
                                    "column {}: missing value but missing not permitted",
                                    spec.name
                                )))
                            }
                            _ => {}
                        }
                    }
                }
                _ => {
                    return Err(Error::InvalidSchema(format!(
                        "column {}: storage does not match declared kind",
                        spec.name
                    )))
                }
            }
        }
        Ok(Dataset {
            schema,
            columns,
            n_rows,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        Ok(&self.columns[self.schema.var_index(name)?])
    }

    pub fn column_at(&self, idx: usize) -> &Column {
        &self.columns[idx]
    }

    pub fn same_schema(&self, other: &Dataset) -> Result<()> {
        if self.schema.variables != other.schema.variables {
            return Err(Error::SchemaMismatch(format!(
                "{} vs {}",
                self.schema.dataset_name, other.schema.dataset_name
            )));
        }
        Ok(())
    }

    /// Packs one cell into an `i64` usable as an exact-equality key.
    /// Category index for categorical cells, the value itself for integer
    /// cells, and a sentinel for integer missing.
    pub(crate) fn key_at(&self, var_idx: usize, row: usize) -> i64 {
        match &self.columns[var_idx] {
            Column::Cat(v) => v[row] as i64,
            Column::Int(v) => v[row].unwrap_or(MISSING_KEY),
        }
    }

    /// Exact-equality key tuples for the named variables, one per row.
    pub(crate) fn key_rows(&self, var_idxs: &[usize]) -> Vec<Vec<i64>> {
        (0..self.n_rows)
            .map(|r| var_idxs.iter().map(|&v| self.key_at(v, r)).collect())
            .collect()
    }

    /// Marginal counts of a variable over its exact cell values.
    pub fn marginal_counts(&self, name: &str) -> Result<Vec<(i64, u64)>> {
        let idx = self.schema.var_index(name)?;
        let mut counts = std::collections::BTreeMap::new();
        for r in 0..self.n_rows {
            *counts.entry(self.key_at(idx, r)).or_insert(0u64) += 1;
        }
        Ok(counts.into_iter().collect())
    }

    /// Stacks two datasets with identical schemas, rows of `self` first.
    pub fn vstack(&self, other: &Dataset) -> Result<Dataset> {
        self.same_schema(other)?;
        let columns = self
            .columns
            .iter()
            .zip(&other.columns)
            .map(|(a, b)| match (a, b) {
                (Column::Cat(x), Column::Cat(y)) => {
                    let mut v = x.clone();
                    v.extend_from_slice(y);
                    Column::Cat(v)
                }
                (Column::Int(x), Column::Int(y)) => {
                    let mut v = x.clone();
                    v.extend_from_slice(y);
                    Column::Int(v)
                }
                _ => unreachable!("same_schema guarantees matching kinds"),
            })
            .collect();
        Dataset::new(self.schema.clone(), columns)
    }

    /// Renders a single cell back to its textual form.
    pub fn cell_label(&self, var_idx: usize, row: usize) -> String {
        let spec = &self.schema.variables[var_idx];
        match &self.columns[var_idx] {
            Column::Cat(v) => spec.categories()[v[row] as usize].clone(),
            Column::Int(v) => match v[row] {
                Some(x) => x.to_string(),
                None => spec.missing_label.clone(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_var_schema() -> Schema {
        Schema::new(
            "t",
            vec![
                VariableSpec::categorical("SEX", &["1", "2"]),
                VariableSpec::integer("AGE", 0, 95).with_missing(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn schema_rejects_duplicate_names() {
        let err = Schema::new(
            "t",
            vec![
                VariableSpec::categorical("A", &["x"]),
                VariableSpec::categorical("A", &["y"]),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidSchema(_)));
    }

    #[test]
    fn schema_rejects_inverted_range() {
        let err = Schema::new("t", vec![VariableSpec::integer("AGE", 10, 5)]).unwrap_err();
        assert!(matches!(err, Error::InvalidSchema(_)));
    }

    #[test]
    fn missing_label_added_on_with_missing() {
        let v = VariableSpec::categorical("LTILL", &["1", "2"]).with_missing();
        assert_eq!(v.categories(), &["1", "2", "NA"]);
        assert_eq!(v.missing_index(), Some(2));
    }

    #[test]
    fn dataset_validates_ranges() {
        let schema = two_var_schema();
        let err = Dataset::new(
            schema,
            vec![Column::Cat(vec![0]), Column::Int(vec![Some(120)])],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidSchema(_)));
    }

    #[test]
    fn vstack_concatenates_rows() {
        let schema = two_var_schema();
        let a = Dataset::new(
            schema.clone(),
            vec![Column::Cat(vec![0, 1]), Column::Int(vec![Some(3), None])],
        )
        .unwrap();
        let b = Dataset::new(
            schema,
            vec![Column::Cat(vec![1]), Column::Int(vec![Some(40)])],
        )
        .unwrap();
        let s = a.vstack(&b).unwrap();
        assert_eq!(s.n_rows(), 3);
        assert_eq!(s.key_at(1, 2), 40);
    }

    #[test]
    fn schema_json_round_trip() {
        let schema = two_var_schema();
        let back = Schema::from_json(&schema.to_json()).unwrap();
        assert_eq!(schema, back);
    }
}
