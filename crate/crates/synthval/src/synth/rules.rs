//! Deterministic data rules (e.g. age <= 15 implies marital status single),
//! enforced post-hoc by overwriting the consequence value. The checker is
//! re-runnable as a standalone validator on any dataset.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabular::{Column, Dataset, VarKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleOp {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RuleValue {
    Int(i64),
    Text(String),
}

impl RuleValue {
    fn as_label(&self) -> String {
        match self {
            RuleValue::Int(v) => v.to_string(),
            RuleValue::Text(s) => s.clone(),
        }
    }

    fn as_int(&self) -> Option<i64> {
        match self {
            RuleValue::Int(v) => Some(*v),
            RuleValue::Text(s) => s.parse().ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleAtom {
    pub var: String,
    pub op: RuleOp,
    pub value: RuleValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleAssign {
    pub var: String,
    pub value: RuleValue,
}

/// `if` is a conjunction of atoms; `then` assigns one value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataRule {
    #[serde(rename = "if")]
    pub condition: Vec<RuleAtom>,
    #[serde(rename = "then")]
    pub consequence: RuleAssign,
}

impl DataRule {
    pub fn validate(&self, ds: &Dataset) -> Result<()> {
        if self.condition.is_empty() {
            return Err(Error::InvalidRule("empty condition".into()));
        }
        for atom in &self.condition {
            if atom.var == self.consequence.var {
                return Err(Error::InvalidRule(format!(
                    "consequence variable {:?} referenced in condition",
                    self.consequence.var
                )));
            }
            let spec = ds.schema().var(&atom.var)?;
            match spec.kind {
                VarKind::Categorical => {
                    if atom.op != RuleOp::Eq {
                        return Err(Error::InvalidRule(format!(
                            "{}: ordering comparison on a categorical variable",
                            atom.var
                        )));
                    }
                    if spec.category_index(&atom.value.as_label()).is_none() {
                        return Err(Error::InvalidRule(format!(
                            "{}: unknown category {:?}",
                            atom.var,
                            atom.value.as_label()
                        )));
                    }
                }
                VarKind::Integer => {
                    if atom.value.as_int().is_none() {
                        return Err(Error::InvalidRule(format!(
                            "{}: non-integer comparison value",
                            atom.var
                        )));
                    }
                }
            }
        }
        resolve_assignment(ds, &self.consequence)?;
        Ok(())
    }

    fn holds(&self, ds: &Dataset, row: usize) -> bool {
        self.condition.iter().all(|atom| {
            let idx = ds.schema().var_index(&atom.var).expect("validated");
            match ds.column_at(idx) {
                Column::Cat(vals) => {
                    let want = ds.schema().variables[idx]
                        .category_index(&atom.value.as_label())
                        .expect("validated");
                    vals[row] == want
                }
                Column::Int(vals) => {
                    let want = atom.value.as_int().expect("validated");
                    match (vals[row], atom.op) {
                        (Some(v), RuleOp::Eq) => v == want,
                        (Some(v), RuleOp::Le) => v <= want,
                        (Some(v), RuleOp::Ge) => v >= want,
                        (None, _) => false, // missing never satisfies an atom
                    }
                }
            }
        })
    }
}

enum ResolvedAssign {
    Cat(usize, u32),
    Int(usize, i64),
}

fn resolve_assignment(ds: &Dataset, assign: &RuleAssign) -> Result<ResolvedAssign> {
    let idx = ds.schema().var_index(&assign.var)?;
    let spec = &ds.schema().variables[idx];
    match spec.kind {
        VarKind::Categorical => {
            let cat = spec
                .category_index(&assign.value.as_label())
                .ok_or_else(|| {
                    Error::InvalidRule(format!(
                        "{}: unknown category {:?}",
                        assign.var,
                        assign.value.as_label()
                    ))
                })?;
            Ok(ResolvedAssign::Cat(idx, cat))
        }
        VarKind::Integer => {
            let v = assign
                .value
                .as_int()
                .ok_or_else(|| Error::InvalidRule(format!("{}: non-integer value", assign.var)))?;
            Ok(ResolvedAssign::Int(idx, v))
        }
    }
}

pub fn load_rules(text: &str) -> Result<Vec<DataRule>> {
    Ok(serde_json::from_str(text)?)
}

/// Rows where some rule's condition holds but the consequence value differs.
pub fn count_violations(ds: &Dataset, rules: &[DataRule]) -> Result<usize> {
    for rule in rules {
        rule.validate(ds)?;
    }
    let mut violations = 0;
    for row in 0..ds.n_rows() {
        let mut violated = false;
        for rule in rules {
            if !rule.holds(ds, row) {
                continue;
            }
            let ok = match resolve_assignment(ds, &rule.consequence)? {
                ResolvedAssign::Cat(idx, cat) => match ds.column_at(idx) {
                    Column::Cat(vals) => vals[row] == cat,
                    _ => unreachable!(),
                },
                ResolvedAssign::Int(idx, v) => match ds.column_at(idx) {
                    Column::Int(vals) => vals[row] == Some(v),
                    _ => unreachable!(),
                },
            };
            if !ok {
                violated = true;
            }
        }
        violations += usize::from(violated);
    }
    Ok(violations)
}

/// Enforces rules by overwriting consequence values. Returns the patched
/// dataset and the pre-enforcement violation count.
///
/// A consequence may enable another rule's condition (e.g. a rule forcing
/// an economic-position code whose value triggers a social-class rule), so
/// passes repeat until a fixed point; `len(rules)` passes always suffice
/// for a conflict-free rule set since each pass settles at least one rule.
pub fn apply_rules(ds: &Dataset, rules: &[DataRule]) -> Result<(Dataset, usize)> {
    let violations = count_violations(ds, rules)?;
    let mut current = ds.clone();
    for _ in 0..rules.len().max(1) {
        if count_violations(&current, rules)? == 0 {
            return Ok((current, violations));
        }
        current = apply_rules_once(&current, rules)?;
    }
    if count_violations(&current, rules)? != 0 {
        return Err(Error::InvalidRule(
            "rules do not reach a fixed point".into(),
        ));
    }
    Ok((current, violations))
}

fn apply_rules_once(ds: &Dataset, rules: &[DataRule]) -> Result<Dataset> {
    let mut columns: Vec<Column> = (0..ds.schema().variables.len())
        .map(|i| ds.column_at(i).clone())
        .collect();
    for row in 0..ds.n_rows() {
        // first pass: detect conflicting assignments on this row
        let mut pending: Vec<(usize, ResolvedAssign)> = Vec::new();
        for rule in rules {
            if rule.holds(ds, row) {
                pending.push((row, resolve_assignment(ds, &rule.consequence)?));
            }
        }
        for i in 0..pending.len() {
            for j in (i + 1)..pending.len() {
                let conflict = match (&pending[i].1, &pending[j].1) {
                    (ResolvedAssign::Cat(a, x), ResolvedAssign::Cat(b, y)) => a == b && x != y,
                    (ResolvedAssign::Int(a, x), ResolvedAssign::Int(b, y)) => a == b && x != y,
                    _ => false,
                };
                if conflict {
                    let var = match &pending[i].1 {
                        ResolvedAssign::Cat(idx, _) | ResolvedAssign::Int(idx, _) => {
                            ds.schema().variables[*idx].name.clone()
                        }
                    };
                    return Err(Error::RuleConflict { row, variable: var });
                }
            }
        }
        for (_, assign) in pending {
            match assign {
                ResolvedAssign::Cat(idx, cat) => {
                    if let Column::Cat(vals) = &mut columns[idx] {
                        vals[row] = cat;
                    }
                }
                ResolvedAssign::Int(idx, v) => {
                    if let Column::Int(vals) = &mut columns[idx] {
                        vals[row] = Some(v);
                    }
                }
            }
        }
    }
    Dataset::new(ds.schema().clone(), columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::{Schema, VariableSpec};

    fn age_mstatus_ds(ages: &[i64], mstatus: &[u32]) -> Dataset {
        let schema = Schema::new(
            "t",
            vec![
                VariableSpec::integer("AGE", 0, 95),
                VariableSpec::categorical("MSTATUS", &["1", "2", "3"]),
            ],
        )
        .unwrap();
        Dataset::new(
            schema,
            vec![
                Column::Int(ages.iter().map(|&a| Some(a)).collect()),
                Column::Cat(mstatus.to_vec()),
            ],
        )
        .unwrap()
    }

    fn age_rule() -> DataRule {
        serde_json::from_str(
            r#"{"if":[{"var":"AGE","op":"<=","value":15}],"then":{"var":"MSTATUS","value":"1"}}"#,
        )
        .unwrap()
    }

    #[test]
    fn apply_overwrites_and_counts_violations() {
        let ds = age_mstatus_ds(&[10, 40, 12], &[1, 1, 0]);
        let (patched, violations) = apply_rules(&ds, &[age_rule()]).unwrap();
        assert_eq!(violations, 1); // row 0 violates, row 2 already single
        assert_eq!(count_violations(&patched, &[age_rule()]).unwrap(), 0);
        // untouched rows keep their values
        assert_eq!(patched.cell_label(1, 1), "2");
    }

    #[test]
    fn conflicting_rules_error_with_row() {
        let other: DataRule = serde_json::from_str(
            r#"{"if":[{"var":"AGE","op":"<=","value":20}],"then":{"var":"MSTATUS","value":"2"}}"#,
        )
        .unwrap();
        let ds = age_mstatus_ds(&[10], &[0]);
        let err = apply_rules(&ds, &[age_rule(), other]).unwrap_err();
        assert!(matches!(err, Error::RuleConflict { row: 0, .. }));
    }

    #[test]
    fn consequence_in_condition_is_invalid() {
        let bad: DataRule = serde_json::from_str(
            r#"{"if":[{"var":"MSTATUS","op":"=","value":"1"}],"then":{"var":"MSTATUS","value":"2"}}"#,
        )
        .unwrap();
        let ds = age_mstatus_ds(&[10], &[0]);
        assert!(matches!(
            bad.validate(&ds),
            Err(Error::InvalidRule(_))
        ));
    }

    #[test]
    fn chained_rules_reach_fixed_point() {
        // first rule's consequence enables the second rule's condition
        let schema = Schema::new(
            "t",
            vec![
                VariableSpec::integer("AGE", 0, 95),
                VariableSpec::categorical("E", &["1", "2"]),
                VariableSpec::categorical("S", &["1", "9"]),
            ],
        )
        .unwrap();
        let ds = Dataset::new(
            schema,
            vec![
                Column::Int(vec![Some(10)]),
                Column::Cat(vec![0]),
                Column::Cat(vec![0]),
            ],
        )
        .unwrap();
        let rules: Vec<DataRule> = serde_json::from_str(
            r#"[
                {"if":[{"var":"AGE","op":"<=","value":15}],"then":{"var":"E","value":"2"}},
                {"if":[{"var":"E","op":"=","value":"2"}],"then":{"var":"S","value":"9"}}
            ]"#,
        )
        .unwrap();
        let (patched, violations) = apply_rules(&ds, &rules).unwrap();
        assert_eq!(violations, 1); // only the age rule fires on the input
        assert_eq!(count_violations(&patched, &rules).unwrap(), 0);
        assert_eq!(patched.cell_label(2, 0), "9");
    }

    #[test]
    fn rules_file_round_trip() {
        let rules = vec![age_rule()];
        let text = serde_json::to_string(&rules).unwrap();
        assert_eq!(load_rules(&text).unwrap(), rules);
    }
}
