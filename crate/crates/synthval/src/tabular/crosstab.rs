//! Contingency tables over one or two variables.
//!
//! Integer variables are binned with fixed-width bins anchored at the schema
//! minimum; missing is always its own cell. Only nonzero cells are stored,
//! lookups of absent cells return 0.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::tabular::{Column, Dataset, VarKind, VariableSpec};

/// Fixed-width binning for integer variables inside cross-tabulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinPolicy {
    pub width: i64,
}

impl Default for BinPolicy {
    fn default() -> Self {
        BinPolicy { width: 5 }
    }
}

impl BinPolicy {
    pub fn new(width: i64) -> Self {
        assert!(width >= 1, "bin width must be at least 1");
        BinPolicy { width }
    }
}

/// One axis value of a contingency cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CellPart {
    Cat(u32),
    Bin(i64),
    Missing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    variables: Vec<String>,
    cells: BTreeMap<Vec<CellPart>, u64>,
    total: u64,
    /// Size of the full (binned) category product, both-zero cells included.
    space: u64,
}

impl ContingencyTable {
    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn cells(&self) -> &BTreeMap<Vec<CellPart>, u64> {
        &self.cells
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn space(&self) -> u64 {
        self.space
    }

    pub fn count(&self, key: &[CellPart]) -> u64 {
        self.cells.get(key).copied().unwrap_or(0)
    }
}

fn cell_part(spec: &VariableSpec, col: &Column, row: usize, bins: &BinPolicy) -> CellPart {
    match col {
        Column::Cat(v) => CellPart::Cat(v[row]),
        Column::Int(v) => match v[row] {
            Some(x) => CellPart::Bin((x - spec.min.unwrap()).div_euclid(bins.width)),
            None => CellPart::Missing,
        },
    }
}

fn axis_size(spec: &VariableSpec, bins: &BinPolicy) -> u64 {
    match spec.kind {
        VarKind::Categorical => spec.categories().len() as u64,
        VarKind::Integer => {
            let n_bins = ((spec.max.unwrap() - spec.min.unwrap()) / bins.width + 1) as u64;
            n_bins + u64::from(spec.missing)
        }
    }
}

/// Counts over the (binned) category product of one or two variables.
pub fn crosstab(ds: &Dataset, vars: &[&str], bins: &BinPolicy) -> Result<ContingencyTable> {
    assert!(
        !vars.is_empty() && vars.len() <= 2,
        "crosstab takes 1 or 2 variables"
    );
    let idxs: Vec<usize> = vars
        .iter()
        .map(|v| ds.schema().var_index(v))
        .collect::<Result<_>>()?;
    let specs: Vec<&VariableSpec> = idxs.iter().map(|&i| &ds.schema().variables[i]).collect();
    let cols: Vec<&Column> = idxs.iter().map(|&i| ds.column_at(i)).collect();

    let mut cells: BTreeMap<Vec<CellPart>, u64> = BTreeMap::new();
    for row in 0..ds.n_rows() {
        let key: Vec<CellPart> = specs
            .iter()
            .zip(&cols)
            .map(|(spec, col)| cell_part(spec, col, row, bins))
            .collect();
        *cells.entry(key).or_insert(0) += 1;
    }
    let space = specs.iter().map(|s| axis_size(s, bins)).product();
    Ok(ContingencyTable {
        variables: vars.iter().map(|s| s.to_string()).collect(),
        cells,
        total: ds.n_rows() as u64,
        space,
    })
}

/// Renders one axis value back to a label, e.g. `[10,15)` for a bin.
pub fn cell_part_label(spec: &VariableSpec, part: &CellPart, bins: &BinPolicy) -> String {
    match part {
        CellPart::Cat(i) => spec.categories()[*i as usize].clone(),
        CellPart::Bin(b) => {
            let lo = spec.min.unwrap() + b * bins.width;
            format!("[{},{})", lo, lo + bins.width)
        }
        CellPart::Missing => spec.missing_label.clone(),
    }
}

impl ContingencyTable {
    /// Same-variables check used by ROE.
    pub fn compatible(&self, other: &ContingencyTable) -> Result<()> {
        if self.variables != other.variables || self.space != other.space {
            return Err(Error::TableMismatch);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::{Schema, VariableSpec};

    fn ds(sex: &[u32], ltill: &[u32]) -> Dataset {
        let schema = Schema::new(
            "t",
            vec![
                VariableSpec::categorical("SEX", &["1", "2"]),
                VariableSpec::categorical("LTILL", &["y", "n"]),
            ],
        )
        .unwrap();
        Dataset::new(
            schema,
            vec![Column::Cat(sex.to_vec()), Column::Cat(ltill.to_vec())],
        )
        .unwrap()
    }

    #[test]
    fn univariate_counts() {
        let d = ds(&[0, 0, 1, 0], &[0, 0, 0, 0]);
        let t = crosstab(&d, &["SEX"], &BinPolicy::default()).unwrap();
        assert_eq!(t.count(&[CellPart::Cat(0)]), 3);
        assert_eq!(t.count(&[CellPart::Cat(1)]), 1);
        assert_eq!(t.total(), 4);
    }

    #[test]
    fn bivariate_counts() {
        let d = ds(&[0, 0, 1], &[0, 1, 0]);
        let t = crosstab(&d, &["SEX", "LTILL"], &BinPolicy::default()).unwrap();
        assert_eq!(t.count(&[CellPart::Cat(0), CellPart::Cat(0)]), 1);
        assert_eq!(t.count(&[CellPart::Cat(0), CellPart::Cat(1)]), 1);
        assert_eq!(t.count(&[CellPart::Cat(1), CellPart::Cat(0)]), 1);
        assert_eq!(t.count(&[CellPart::Cat(1), CellPart::Cat(1)]), 0);
        assert_eq!(t.cells().len(), 3);
    }

    #[test]
    fn integer_binning_anchored_at_min() {
        let schema = Schema::new("t", vec![VariableSpec::integer("AGE", 0, 95)]).unwrap();
        let d = Dataset::new(
            schema,
            vec![Column::Int(vec![Some(3), Some(7), Some(12)])],
        )
        .unwrap();
        let t = crosstab(&d, &["AGE"], &BinPolicy::default()).unwrap();
        assert_eq!(t.count(&[CellPart::Bin(0)]), 1); // [0,5)
        assert_eq!(t.count(&[CellPart::Bin(1)]), 1); // [5,10)
        assert_eq!(t.count(&[CellPart::Bin(2)]), 1); // [10,15)
        let spec = VariableSpec::integer("AGE", 0, 95);
        assert_eq!(
            cell_part_label(&spec, &CellPart::Bin(2), &BinPolicy::default()),
            "[10,15)"
        );
    }

    #[test]
    fn missing_is_its_own_cell() {
        let schema =
            Schema::new("t", vec![VariableSpec::integer("AGE", 0, 95).with_missing()]).unwrap();
        let d = Dataset::new(schema, vec![Column::Int(vec![Some(1), None])]).unwrap();
        let t = crosstab(&d, &["AGE"], &BinPolicy::default()).unwrap();
        assert_eq!(t.count(&[CellPart::Missing]), 1);
        assert_eq!(t.total(), 2);
    }

    #[test]
    fn unknown_variable_errors() {
        let d = ds(&[0], &[0]);
        assert!(matches!(
            crosstab(&d, &["NOPE"], &BinPolicy::default()),
            Err(Error::UnknownVariable(_))
        ));
    }
}
