//! One-hot design matrices feeding the regression engine.
//!
//! Categorical predictors expand to k-1 indicators with the first category
//! as reference (a missing category is an ordinary level). Integer
//! predictors enter standardized with the n-1 (sample) standard deviation;
//! missing integer values map to 0 after standardization, i.e. the mean.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tabular::{Column, Dataset, VarKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Intercept,
    Indicator,
    Numeric,
}

#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub names: Vec<String>,
    pub kinds: Vec<ColumnKind>,
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    /// Degenerate-column drops, recorded rather than fatal.
    pub warnings: Vec<String>,
}

impl DesignMatrix {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }
}

/// How the response column is encoded.
#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    /// Integer variable used directly as a numeric response.
    Numeric { variable: String },
    /// 1 when the variable equals the given category, else 0.
    Indicator { variable: String, category: String },
}

impl Response {
    pub fn variable(&self) -> &str {
        match self {
            Response::Numeric { variable } | Response::Indicator { variable, .. } => variable,
        }
    }
}

/// Builds a design with every non-response variable as predictor. Rows with
/// a missing numeric response are dropped.
pub fn onehot_design(ds: &Dataset, response: &Response) -> Result<DesignMatrix> {
    let resp_idx = ds.schema().var_index(response.variable())?;
    let spec = &ds.schema().variables[resp_idx];
    let (rows, y): (Vec<usize>, Vec<f64>) = match response {
        Response::Numeric { .. } => {
            if spec.kind != VarKind::Integer {
                return Err(Error::InvalidConfig(format!(
                    "{}: numeric response requires an integer variable",
                    spec.name
                )));
            }
            let Column::Int(vals) = ds.column_at(resp_idx) else {
                unreachable!()
            };
            (0..ds.n_rows())
                .filter_map(|r| vals[r].map(|v| (r, v as f64)))
                .unzip()
        }
        Response::Indicator { category, .. } => {
            let target = spec
                .category_index(category)
                .ok_or_else(|| Error::UnknownVariable(format!("{}={}", spec.name, category)))?;
            let Column::Cat(vals) = ds.column_at(resp_idx) else {
                unreachable!()
            };
            (0..ds.n_rows())
                .map(|r| (r, f64::from(vals[r] == target)))
                .unzip()
        }
    };
    let predictors: Vec<usize> = (0..ds.schema().variables.len())
        .filter(|&i| i != resp_idx)
        .collect();
    build_design(ds, &predictors, &rows, y)
}

/// Builds a design from explicit predictor variables, row subset and
/// response vector. This is the entry point for the propensity model, where
/// the response is the synthetic-record indicator rather than a variable.
pub fn build_design(
    ds: &Dataset,
    predictors: &[usize],
    rows: &[usize],
    y: Vec<f64>,
) -> Result<DesignMatrix> {
    assert_eq!(rows.len(), y.len());
    let n = rows.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }

    let mut names = vec!["(intercept)".to_string()];
    let mut kinds = vec![ColumnKind::Intercept];
    let mut cols: Vec<Vec<f64>> = vec![vec![1.0; n]];
    let mut warnings = Vec::new();

    for &pi in predictors {
        let spec = &ds.schema().variables[pi];
        match ds.column_at(pi) {
            Column::Cat(vals) => {
                // First category is the reference level.
                for (ci, cat) in spec.categories().iter().enumerate().skip(1) {
                    let col: Vec<f64> = rows
                        .iter()
                        .map(|&r| f64::from(vals[r] == ci as u32))
                        .collect();
                    push_unless_degenerate(
                        format!("{}={}", spec.name, cat),
                        ColumnKind::Indicator,
                        col,
                        &mut names,
                        &mut kinds,
                        &mut cols,
                        &mut warnings,
                    );
                }
            }
            Column::Int(vals) => {
                let observed: Vec<f64> = rows
                    .iter()
                    .filter_map(|&r| vals[r].map(|v| v as f64))
                    .collect();
                if observed.is_empty() {
                    warnings.push(format!("{}: dropped, all values missing", spec.name));
                    continue;
                }
                let mean = observed.iter().sum::<f64>() / observed.len() as f64;
                let sd = if observed.len() > 1 {
                    (observed.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
                        / (observed.len() - 1) as f64)
                        .sqrt()
                } else {
                    0.0
                };
                if sd == 0.0 {
                    warnings.push(format!("{}: dropped, zero variance", spec.name));
                    continue;
                }
                let col: Vec<f64> = rows
                    .iter()
                    .map(|&r| vals[r].map_or(0.0, |v| (v as f64 - mean) / sd))
                    .collect();
                names.push(spec.name.clone());
                kinds.push(ColumnKind::Numeric);
                cols.push(col);
            }
        }
    }

    let p = cols.len();
    let x = DMatrix::from_fn(n, p, |r, c| cols[c][r]);
    Ok(DesignMatrix {
        names,
        kinds,
        x,
        y: DVector::from_vec(y),
        warnings,
    })
}

#[allow(clippy::too_many_arguments)]
fn push_unless_degenerate(
    name: String,
    kind: ColumnKind,
    col: Vec<f64>,
    names: &mut Vec<String>,
    kinds: &mut Vec<ColumnKind>,
    cols: &mut Vec<Vec<f64>>,
    warnings: &mut Vec<String>,
) {
    let first = col[0];
    if col.iter().all(|&v| v == first) {
        warnings.push(format!("{name}: dropped, single observed level"));
        return;
    }
    names.push(name);
    kinds.push(kind);
    cols.push(col);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::{Schema, VariableSpec};
    use approx::assert_abs_diff_eq;

    fn make_ds() -> Dataset {
        let schema = Schema::new(
            "t",
            vec![
                VariableSpec::categorical("C3", &["a", "b", "c"]),
                VariableSpec::integer("AGE", 0, 95),
                VariableSpec::categorical("Y", &["0", "1"]),
            ],
        )
        .unwrap();
        Dataset::new(
            schema,
            vec![
                Column::Cat(vec![0, 1, 2]),
                Column::Int(vec![Some(10), Some(20), Some(30)]),
                Column::Cat(vec![0, 1, 1]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn three_level_predictor_gives_two_indicators() {
        let dm = onehot_design(
            &make_ds(),
            &Response::Indicator {
                variable: "Y".into(),
                category: "1".into(),
            },
        )
        .unwrap();
        let indicators = dm
            .kinds
            .iter()
            .filter(|k| **k == ColumnKind::Indicator)
            .count();
        assert_eq!(indicators, 2);
        assert_eq!(dm.names[1], "C3=b");
        assert_eq!(dm.names[2], "C3=c");
    }

    #[test]
    fn integer_predictor_standardized_with_sample_sd() {
        let dm = onehot_design(
            &make_ds(),
            &Response::Indicator {
                variable: "Y".into(),
                category: "1".into(),
            },
        )
        .unwrap();
        let age_col = dm.names.iter().position(|n| n == "AGE").unwrap();
        // sample sd of [10,20,30] is 10
        assert_abs_diff_eq!(dm.x[(0, age_col)], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dm.x[(1, age_col)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dm.x[(2, age_col)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_predictor_dropped_with_warning() {
        let schema = Schema::new(
            "t",
            vec![
                VariableSpec::categorical("K", &["only", "never"]),
                VariableSpec::categorical("Y", &["0", "1"]),
            ],
        )
        .unwrap();
        let ds = Dataset::new(
            schema,
            vec![Column::Cat(vec![0, 0, 0]), Column::Cat(vec![0, 1, 0])],
        )
        .unwrap();
        let dm = onehot_design(
            &ds,
            &Response::Indicator {
                variable: "Y".into(),
                category: "1".into(),
            },
        )
        .unwrap();
        assert_eq!(dm.p(), 1); // intercept only
        assert_eq!(dm.warnings.len(), 1);
    }

    #[test]
    fn column_count_matches_expansion_rule() {
        // 1 intercept + (3-1) indicators + 1 numeric
        let dm = onehot_design(
            &make_ds(),
            &Response::Indicator {
                variable: "Y".into(),
                category: "1".into(),
            },
        )
        .unwrap();
        assert_eq!(dm.p(), 1 + 2 + 1);
    }

    #[test]
    fn missing_numeric_response_drops_rows() {
        let schema = Schema::new(
            "t",
            vec![
                VariableSpec::integer("AGE", 0, 95).with_missing(),
                VariableSpec::categorical("SEX", &["1", "2"]),
            ],
        )
        .unwrap();
        let ds = Dataset::new(
            schema,
            vec![
                Column::Int(vec![Some(1), None, Some(3)]),
                Column::Cat(vec![0, 1, 1]),
            ],
        )
        .unwrap();
        let dm = onehot_design(
            &ds,
            &Response::Numeric {
                variable: "AGE".into(),
            },
        )
        .unwrap();
        assert_eq!(dm.n(), 2);
    }
}
