//! Utility battery: ratio of estimates (ROE) over univariate and bivariate
//! tables, propensity-score mean squared error (pMSE) with its derived
//! scalings, confidence-interval overlap (CIO) with standardized
//! coefficient differences, and the overall utility aggregate.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::regress;
use crate::tabular::{
    build_design, crosstab, onehot_design, BinPolicy, CellPart, Column, ColumnKind,
    ContingencyTable, Dataset, Response, VarKind,
};

#[derive(Debug, Clone, Serialize)]
pub struct RoeResult {
    pub variables: Vec<String>,
    #[serde(skip)]
    pub per_cell: BTreeMap<Vec<CellPart>, f64>,
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub mean: f64,
    /// Cells of the full category product that neither dataset produced.
    pub skipped_cells: u64,
}

/// Per-cell min/max ratio of counts, averaged over retained cells.
/// A cell with exactly one zero scores 0; cells empty in both tables are
/// skipped rather than rewarded.
pub fn roe(orig_tab: &ContingencyTable, synth_tab: &ContingencyTable) -> Result<RoeResult> {
    orig_tab.compatible(synth_tab)?;
    let mut per_cell = BTreeMap::new();
    let keys: std::collections::BTreeSet<&Vec<CellPart>> = orig_tab
        .cells()
        .keys()
        .chain(synth_tab.cells().keys())
        .collect();
    for key in keys {
        let o = orig_tab.count(key) as f64;
        let s = synth_tab.count(key) as f64;
        let ratio = if o == 0.0 || s == 0.0 {
            0.0
        } else {
            o.min(s) / o.max(s)
        };
        per_cell.insert(key.clone(), ratio);
    }
    let retained = per_cell.len() as u64;
    let mean = if retained == 0 {
        0.0
    } else {
        per_cell.values().sum::<f64>() / retained as f64
    };
    Ok(RoeResult {
        variables: orig_tab.variables().to_vec(),
        per_cell,
        mean,
        skipped_cells: orig_tab.space().saturating_sub(retained),
    })
}

/// Mean univariate ROE over all variables and mean bivariate ROE over all
/// variable pairs (66 pairs for 12 variables).
pub fn roe_suite(orig: &Dataset, synth: &Dataset, bins: &BinPolicy) -> Result<(f64, f64)> {
    orig.same_schema(synth)?;
    let names = orig.schema().names();
    let m = names.len();

    let uni: Vec<f64> = names
        .par_iter()
        .map(|name| {
            let o = crosstab(orig, &[name], bins)?;
            let s = crosstab(synth, &[name], bins)?;
            Ok(roe(&o, &s)?.mean)
        })
        .collect::<Result<_>>()?;

    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
        .collect();
    let bi: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let vars = [names[i], names[j]];
            let o = crosstab(orig, &vars, bins)?;
            let s = crosstab(synth, &vars, bins)?;
            Ok(roe(&o, &s)?.mean)
        })
        .collect::<Result<_>>()?;

    let roe_uni = uni.iter().sum::<f64>() / uni.len() as f64;
    let roe_bi = if bi.is_empty() {
        1.0
    } else {
        bi.iter().sum::<f64>() / bi.len() as f64
    };
    Ok((roe_uni, roe_bi))
}

#[derive(Debug, Clone, Serialize)]
pub struct PmseResult {
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub pmse: f64,
    /// Synthetic share of the stacked data.
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub c: f64,
    /// Parameter count of the propensity model, intercept included.
    pub k: usize,
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub expected_null: f64,
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub ratio: f64,
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub log_ratio: f64,
    /// 1 - 4*pMSE, a [0,1] rescaling tight at c = 1/2.
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub scaled: f64,
    pub model_converged: bool,
}

/// Fits a main-effects logistic propensity model on the stacked data and
/// scores how well it separates synthetic from original records.
pub fn pmse(orig: &Dataset, synth: &Dataset) -> Result<PmseResult> {
    orig.same_schema(synth)?;
    let stacked = orig.vstack(synth)?;
    let n_total = stacked.n_rows();
    let c = synth.n_rows() as f64 / n_total as f64;
    let y: Vec<f64> = (0..n_total)
        .map(|r| f64::from(r >= orig.n_rows()))
        .collect();
    let rows: Vec<usize> = (0..n_total).collect();
    let predictors: Vec<usize> = (0..stacked.schema().variables.len()).collect();
    let dm = build_design(&stacked, &predictors, &rows, y)?;
    let fit = regress::fit_logistic_default(&dm)?;

    let fitted = fit.fitted.as_ref().expect("logistic fit has probabilities");
    let pmse_val = fitted.iter().map(|&p| (p - c).powi(2)).sum::<f64>() / n_total as f64;
    let k = fit.p;
    let expected_null = (k as f64 - 1.0) * (1.0 - c).powi(2) * c / n_total as f64;
    let ratio = if expected_null > 0.0 {
        pmse_val / expected_null
    } else {
        f64::NAN
    };
    Ok(PmseResult {
        pmse: pmse_val,
        c,
        k,
        expected_null,
        ratio,
        log_ratio: ratio.ln(),
        scaled: 1.0 - 4.0 * pmse_val,
        model_converged: fit.converged && !fit.separation_detected,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CioModel {
    pub target: String,
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub mean_overlap: f64,
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub std_diff: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CioResult {
    pub per_model: Vec<CioModel>,
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub mean_cio: f64,
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub mean_std_diff: f64,
    pub n_failed: usize,
}

/// Normalized overlap of two confidence intervals (Karr's J), negative when
/// the intervals are disjoint. Identical intervals score exactly 1.
pub fn interval_overlap(orig: (f64, f64), synth: (f64, f64)) -> f64 {
    if orig == synth {
        return 1.0;
    }
    let lower = orig.0.max(synth.0);
    let upper = orig.1.min(synth.1);
    let w = upper - lower;
    let wo = orig.1 - orig.0;
    let ws = synth.1 - synth.0;
    if wo == 0.0 || ws == 0.0 {
        // a zero-width interval overlaps only by exact containment
        return 0.0;
    }
    0.5 * (w / wo + w / ws)
}

fn model_response(ds: &Dataset, var: &str) -> Result<Response> {
    let spec = ds.schema().var(var)?;
    match spec.kind {
        VarKind::Integer => Ok(Response::Numeric {
            variable: var.to_string(),
        }),
        VarKind::Categorical => {
            let cats = spec.categories();
            if cats.len() == 2 {
                Ok(Response::Indicator {
                    variable: var.to_string(),
                    category: cats[1].clone(),
                })
            } else {
                // one-vs-modal-category indicator, modal category of ds
                let idx = ds.schema().var_index(var)?;
                let Column::Cat(vals) = ds.column_at(idx) else {
                    unreachable!()
                };
                let mut counts = vec![0u64; cats.len()];
                for &v in vals {
                    counts[v as usize] += 1;
                }
                let modal = counts
                    .iter()
                    .enumerate()
                    .max_by_key(|&(i, &c)| (c, std::cmp::Reverse(i)))
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                Ok(Response::Indicator {
                    variable: var.to_string(),
                    category: cats[modal].clone(),
                })
            }
        }
    }
}

fn fit_for(ds: &Dataset, response: &Response) -> Result<regress::RegressionFit> {
    let dm = onehot_design(ds, response)?;
    let fit = match response {
        Response::Numeric { .. } => regress::fit_linear(&dm)?,
        Response::Indicator { .. } => {
            let fit = regress::fit_logistic_default(&dm)?;
            if !fit.converged {
                return Err(Error::NoConvergence {
                    iterations: fit.iterations,
                    score: f64::NAN,
                });
            }
            if fit.separation_detected {
                return Err(Error::NotConverged);
            }
            fit
        }
    };
    Ok(fit)
}

/// One regression model per variable, fit on original and synthetic data
/// with identical design conventions; CI overlap and standardized
/// differences averaged over non-intercept coefficients matched by name.
/// Returns `None` when every model failed.
pub fn cio_suite(orig: &Dataset, synth: &Dataset, level: f64) -> Result<Option<CioResult>> {
    orig.same_schema(synth)?;
    let names: Vec<String> = orig.schema().names().iter().map(|s| s.to_string()).collect();
    let models: Vec<Result<(f64, f64)>> = names
        .par_iter()
        .map(|var| {
            let response = model_response(orig, var)?;
            let fo = fit_for(orig, &response)?;
            let fs = fit_for(synth, &response)?;
            confint_overlaps(&fo, &fs, level)
        })
        .collect();

    let mut per_model = Vec::new();
    let mut n_failed = 0;
    for (var, res) in names.iter().zip(models) {
        match res {
            Ok((mean_overlap, std_diff)) => per_model.push(CioModel {
                target: var.clone(),
                mean_overlap,
                std_diff,
                converged: true,
            }),
            Err(_) => {
                n_failed += 1;
                per_model.push(CioModel {
                    target: var.clone(),
                    mean_overlap: f64::NAN,
                    std_diff: f64::NAN,
                    converged: false,
                });
            }
        }
    }

    let ok: Vec<&CioModel> = per_model.iter().filter(|m| m.converged).collect();
    if ok.is_empty() {
        return Ok(None);
    }
    let mean_cio = ok.iter().map(|m| m.mean_overlap).sum::<f64>() / ok.len() as f64;
    let mean_std_diff = ok.iter().map(|m| m.std_diff).sum::<f64>() / ok.len() as f64;
    Ok(Some(CioResult {
        per_model,
        mean_cio,
        mean_std_diff,
        n_failed,
    }))
}

/// Mean CI overlap and mean standardized difference over non-intercept
/// coefficients present in both fits.
fn confint_overlaps(
    fo: &regress::RegressionFit,
    fs: &regress::RegressionFit,
    level: f64,
) -> Result<(f64, f64)> {
    let ci_o = regress::confint(fo, level)?;
    let ci_s = regress::confint(fs, level)?;
    let mut overlaps = Vec::new();
    let mut std_diffs = Vec::new();
    for (i, name) in fo.names.iter().enumerate() {
        if fo.kinds[i] == ColumnKind::Intercept {
            continue;
        }
        let Some(j) = fs.names.iter().position(|n| n == name) else {
            continue;
        };
        overlaps.push(interval_overlap(ci_o[i], ci_s[j]));
        let diff = (fo.coef[i] - fs.coef[j]).abs();
        std_diffs.push(if diff == 0.0 { 0.0 } else { diff / fo.se[i] });
    }
    if overlaps.is_empty() {
        return Err(Error::NoComponents);
    }
    Ok((
        overlaps.iter().sum::<f64>() / overlaps.len() as f64,
        std_diffs.iter().sum::<f64>() / std_diffs.len() as f64,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct UtilityReport {
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub roe_uni: f64,
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub roe_bi: f64,
    pub pmse: PmseResult,
    pub cio: Option<CioResult>,
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub overall: f64,
    pub components_used: Vec<String>,
}

/// Unweighted mean of the available components.
pub fn overall_utility(
    roe_uni: f64,
    roe_bi: f64,
    cio_mean: Option<f64>,
    pmse_scaled: f64,
) -> Result<f64> {
    let mut components = vec![roe_uni, roe_bi, pmse_scaled];
    if let Some(c) = cio_mean {
        components.push(c);
    }
    if components.is_empty() {
        return Err(Error::NoComponents);
    }
    Ok(components.iter().sum::<f64>() / components.len() as f64)
}

/// Runs the full battery for one synthetic dataset.
pub fn utility_report(
    orig: &Dataset,
    synth: &Dataset,
    bins: &BinPolicy,
    level: f64,
    cio_floor_at_zero: bool,
) -> Result<UtilityReport> {
    let (roe_uni, roe_bi) = roe_suite(orig, synth, bins)?;
    let pmse_res = pmse(orig, synth)?;
    let cio = cio_suite(orig, synth, level)?;
    let cio_mean = cio.as_ref().map(|c| {
        if cio_floor_at_zero {
            c.mean_cio.max(0.0)
        } else {
            c.mean_cio
        }
    });
    let overall = overall_utility(roe_uni, roe_bi, cio_mean, pmse_res.scaled)?;
    let mut components_used = vec![
        "roe_uni".to_string(),
        "roe_bi".to_string(),
        "pmse_scaled".to_string(),
    ];
    if cio.is_some() {
        components_used.push("cio".to_string());
    }
    Ok(UtilityReport {
        roe_uni,
        roe_bi,
        pmse: pmse_res,
        cio,
        overall,
        components_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::{Schema, VariableSpec};
    use approx::assert_abs_diff_eq;

    fn one_var_ds(cats: &[&str], vals: &[u32]) -> Dataset {
        let schema = Schema::new("t", vec![VariableSpec::categorical("V", cats)]).unwrap();
        Dataset::new(schema, vec![Column::Cat(vals.to_vec())]).unwrap()
    }

    fn tab(cats: &[&str], vals: &[u32]) -> ContingencyTable {
        crosstab(&one_var_ds(cats, vals), &["V"], &BinPolicy::default()).unwrap()
    }

    #[test]
    fn roe_hand_arithmetic() {
        let counts_a: Vec<u32> = std::iter::repeat(0u32)
            .take(50)
            .chain(std::iter::repeat(1).take(50))
            .collect();
        let counts_b: Vec<u32> = std::iter::repeat(0u32)
            .take(40)
            .chain(std::iter::repeat(1).take(60))
            .collect();
        let r = roe(&tab(&["a", "b"], &counts_a), &tab(&["a", "b"], &counts_b)).unwrap();
        assert_abs_diff_eq!(r.per_cell[&vec![CellPart::Cat(0)]], 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(r.per_cell[&vec![CellPart::Cat(1)]], 50.0 / 60.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.mean, (0.8 + 50.0 / 60.0) / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn roe_identical_tables_is_one() {
        let t = tab(&["a", "b"], &[0, 0, 1]);
        assert_eq!(roe(&t, &t).unwrap().mean, 1.0);
    }

    #[test]
    fn roe_full_disagreement_is_zero() {
        let a = tab(&["a", "b"], &[0; 10]);
        let b = tab(&["a", "b"], &[1; 10]);
        let r = roe(&a, &b).unwrap();
        assert_eq!(r.mean, 0.0);
    }

    #[test]
    fn roe_skips_both_zero_cells() {
        // category "c" occurs in neither dataset
        let a = tab(&["a", "b", "c"], &[0, 1]);
        let b = tab(&["a", "b", "c"], &[0, 1]);
        let r = roe(&a, &b).unwrap();
        assert_eq!(r.skipped_cells, 1);
        assert_eq!(r.mean, 1.0);
    }

    fn small_mixed_ds() -> Dataset {
        let schema = Schema::new(
            "t",
            vec![
                VariableSpec::categorical("A", &["x", "y"]),
                VariableSpec::categorical("B", &["u", "v", "w"]),
                VariableSpec::integer("AGE", 0, 95),
            ],
        )
        .unwrap();
        let n = 60;
        let a: Vec<u32> = (0..n).map(|i| (i % 2) as u32).collect();
        let b: Vec<u32> = (0..n).map(|i| (i % 3) as u32).collect();
        let age: Vec<Option<i64>> = (0..n).map(|i| Some((i * 7 % 80) as i64)).collect();
        Dataset::new(schema, vec![Column::Cat(a), Column::Cat(b), Column::Int(age)]).unwrap()
    }

    #[test]
    fn roe_suite_identical_data_is_one_one() {
        let ds = small_mixed_ds();
        let (u, b) = roe_suite(&ds, &ds, &BinPolicy::default()).unwrap();
        assert_eq!((u, b), (1.0, 1.0));
    }

    #[test]
    fn pmse_identity_is_zero() {
        let ds = small_mixed_ds();
        let r = pmse(&ds, &ds).unwrap();
        assert!(r.pmse < 1e-8, "pmse = {}", r.pmse);
        assert_abs_diff_eq!(r.scaled, 1.0, epsilon = 4e-8);
        assert_abs_diff_eq!(r.c, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn pmse_fully_separable_approaches_quarter() {
        // a single binary variable perfectly separating orig from synth
        let schema =
            Schema::new("t", vec![VariableSpec::categorical("S", &["0", "1"])]).unwrap();
        let orig = Dataset::new(schema.clone(), vec![Column::Cat(vec![0; 200])]).unwrap();
        let synth = Dataset::new(schema, vec![Column::Cat(vec![1; 200])]).unwrap();
        let r = pmse(&orig, &synth).unwrap();
        assert!((0.24..=0.25).contains(&r.pmse), "pmse = {}", r.pmse);
        assert!((0.0..=0.04).contains(&r.scaled), "scaled = {}", r.scaled);
    }

    #[test]
    fn interval_overlap_matches_hand_cases() {
        assert_abs_diff_eq!(interval_overlap((0.0, 2.0), (1.0, 3.0)), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(interval_overlap((0.0, 1.0), (2.0, 3.0)), -1.0, epsilon = 1e-12);
        assert_eq!(interval_overlap((0.5, 0.5), (0.5, 0.5)), 1.0);
    }

    #[test]
    fn cio_identical_datasets_is_exactly_one() {
        let ds = small_mixed_ds();
        let cio = cio_suite(&ds, &ds, 0.95).unwrap().unwrap();
        assert_eq!(cio.mean_cio, 1.0);
        assert_eq!(cio.mean_std_diff, 0.0);
        assert_eq!(cio.n_failed, 0);
    }

    #[test]
    fn overall_matches_published_aggregation() {
        let v = overall_utility(0.981, 0.847, Some(0.506), 0.9994).unwrap();
        assert!((v - 0.833).abs() < 0.0005, "got {v}");
        let v = overall_utility(0.499, 0.255, None, 0.2988).unwrap();
        assert!((v - 0.351).abs() < 0.0005, "got {v}");
        assert_eq!(overall_utility(1.0, 1.0, Some(1.0), 1.0).unwrap(), 1.0);
    }
}
