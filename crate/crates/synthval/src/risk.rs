//! Disclosure-risk engine: WEAP scores, WEAP-filtered TCAP, the marginal
//! baseline and the target-by-keys result matrix.
//!
//! Key equality is exact tuple equality: a missing value matches only
//! missing, and integer keys match exactly (no banding).

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tabular::Dataset;

/// One experiment cell: ordered key variables plus one target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KeyTargetConfig {
    pub keys: Vec<String>,
    pub target: String,
    pub label: String,
}

impl KeyTargetConfig {
    pub fn new(keys: &[&str], target: &str) -> Self {
        KeyTargetConfig {
            keys: keys.iter().map(|s| s.to_string()).collect(),
            target: target.to_string(),
            label: format!("{target}|{}keys", keys.len()),
        }
    }

    fn validate(&self, ds: &Dataset) -> Result<(Vec<usize>, usize)> {
        if self.keys.is_empty() {
            return Err(Error::InvalidConfig("key list is empty".into()));
        }
        if self.keys.contains(&self.target) {
            return Err(Error::InvalidConfig(format!(
                "target {} appears among the keys",
                self.target
            )));
        }
        let key_idxs = self
            .keys
            .iter()
            .map(|k| ds.schema().var_index(k))
            .collect::<Result<Vec<_>>>()?;
        let target_idx = ds.schema().var_index(&self.target)?;
        Ok((key_idxs, target_idx))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TcapResult {
    pub config: KeyTargetConfig,
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub tcap: f64,
    pub n_weap1: u64,
    pub n_matched: u64,
    pub n_undefined: u64,
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub baseline: f64,
    /// Set when no filtered record had an original equivalence class; the
    /// reported tcap falls back to the baseline.
    pub no_matches: bool,
}

/// Per-record WEAP as exact fractions (numerator, denominator), denominator
/// always positive.
pub fn weap_fractions(synth: &Dataset, cfg: &KeyTargetConfig) -> Result<Vec<(u64, u64)>> {
    let (key_idxs, target_idx) = cfg.validate(synth)?;
    let keys = synth.key_rows(&key_idxs);
    let mut key_counts: HashMap<&[i64], u64> = HashMap::new();
    let mut pair_counts: HashMap<(&[i64], i64), u64> = HashMap::new();
    for (row, key) in keys.iter().enumerate() {
        let t = synth.key_at(target_idx, row);
        *key_counts.entry(key.as_slice()).or_insert(0) += 1;
        *pair_counts.entry((key.as_slice(), t)).or_insert(0) += 1;
    }
    Ok(keys
        .iter()
        .enumerate()
        .map(|(row, key)| {
            let t = synth.key_at(target_idx, row);
            (
                pair_counts[&(key.as_slice(), t)],
                key_counts[key.as_slice()],
            )
        })
        .collect())
}

/// Per-record WEAP scores in [0,1].
pub fn weap_scores(synth: &Dataset, cfg: &KeyTargetConfig) -> Result<Vec<f64>> {
    Ok(weap_fractions(synth, cfg)?
        .into_iter()
        .map(|(num, den)| num as f64 / den as f64)
        .collect())
}

fn weap_passes(num: u64, den: u64, threshold: f64) -> bool {
    if threshold >= 1.0 {
        num == den
    } else {
        num as f64 >= threshold * den as f64
    }
}

/// Per-record TCAP fractions for the WEAP-filtered synthetic records.
/// `None` marks an undefined record (empty original equivalence class).
pub fn tcap_fractions(
    orig: &Dataset,
    synth: &Dataset,
    cfg: &KeyTargetConfig,
    weap_threshold: f64,
) -> Result<Vec<Option<(u64, u64)>>> {
    orig.same_schema(synth)?;
    let (key_idxs, target_idx) = cfg.validate(orig)?;
    let weap = weap_fractions(synth, cfg)?;

    let orig_keys = orig.key_rows(&key_idxs);
    let mut key_counts: HashMap<&[i64], u64> = HashMap::new();
    let mut pair_counts: HashMap<(&[i64], i64), u64> = HashMap::new();
    for (row, key) in orig_keys.iter().enumerate() {
        let t = orig.key_at(target_idx, row);
        *key_counts.entry(key.as_slice()).or_insert(0) += 1;
        *pair_counts.entry((key.as_slice(), t)).or_insert(0) += 1;
    }

    let synth_keys = synth.key_rows(&key_idxs);
    let mut out = Vec::new();
    for (row, key) in synth_keys.iter().enumerate() {
        let (num, den) = weap[row];
        if !weap_passes(num, den, weap_threshold) {
            continue;
        }
        match key_counts.get(key.as_slice()) {
            Some(&k_count) => {
                let t = synth.key_at(target_idx, row);
                let pair = pair_counts
                    .get(&(key.as_slice(), t))
                    .copied()
                    .unwrap_or(0);
                out.push(Some((pair, k_count)));
            }
            None => out.push(None),
        }
    }
    Ok(out)
}

/// Baseline correct-attribution probability from the original marginal of
/// the target alone: sum of squared category shares.
pub fn baseline_cap(orig: &Dataset, target: &str) -> Result<f64> {
    let counts = orig.marginal_counts(target)?;
    let n: u64 = counts.iter().map(|(_, c)| c).sum();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(counts
        .iter()
        .map(|(_, c)| {
            let p = *c as f64 / n as f64;
            p * p
        })
        .sum())
}

/// WEAP-filtered TCAP for one key/target configuration. Default threshold
/// is 1.0 (the filter keeps records whose synthetic equivalence class is
/// unanimous on the target).
pub fn tcap(
    orig: &Dataset,
    synth: &Dataset,
    cfg: &KeyTargetConfig,
    weap_threshold: f64,
) -> Result<TcapResult> {
    assert!(
        weap_threshold > 0.0 && weap_threshold <= 1.0,
        "weap threshold must lie in (0,1]"
    );
    let fractions = tcap_fractions(orig, synth, cfg, weap_threshold)?;
    let baseline = baseline_cap(orig, &cfg.target)?;
    let n_weap1 = fractions.len() as u64;
    let defined: Vec<f64> = fractions
        .iter()
        .flatten()
        .map(|&(num, den)| num as f64 / den as f64)
        .collect();
    let n_matched = defined.len() as u64;
    let no_matches = n_matched == 0;
    let tcap = if no_matches {
        baseline
    } else {
        defined.iter().sum::<f64>() / n_matched as f64
    };
    Ok(TcapResult {
        config: cfg.clone(),
        tcap,
        n_weap1,
        n_matched,
        n_undefined: n_weap1 - n_matched,
        baseline,
        no_matches,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TcapMatrix {
    pub labels: Vec<String>,
    pub configs: Vec<KeyTargetConfig>,
    /// One row of results per synthesizer, one cell per configuration.
    pub cells: Vec<Vec<TcapResult>>,
    /// Unweighted mean over configuration cells, per synthesizer.
    #[serde(serialize_with = "crate::report::ser_f64_vec")]
    pub grand_averages: Vec<f64>,
    /// One baseline per distinct target, in first-appearance order.
    pub target_baselines: Vec<(String, f64)>,
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub baseline_average: f64,
}

/// Evaluates every (synthesizer, configuration) cell plus the per-target
/// baseline column. Cells are independent and run in parallel.
pub fn tcap_matrix(
    orig: &Dataset,
    synths: &[(String, &Dataset)],
    configs: &[KeyTargetConfig],
    weap_threshold: f64,
) -> Result<TcapMatrix> {
    if configs.is_empty() {
        return Err(Error::InvalidConfig("no key/target configurations".into()));
    }
    let cells: Vec<Vec<TcapResult>> = synths
        .par_iter()
        .map(|(_, ds)| {
            configs
                .par_iter()
                .map(|cfg| tcap(orig, ds, cfg, weap_threshold))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let grand_averages = cells
        .iter()
        .map(|row| row.iter().map(|c| c.tcap).sum::<f64>() / row.len() as f64)
        .collect();

    let mut target_baselines: Vec<(String, f64)> = Vec::new();
    for cfg in configs {
        if !target_baselines.iter().any(|(t, _)| t == &cfg.target) {
            target_baselines.push((cfg.target.clone(), baseline_cap(orig, &cfg.target)?));
        }
    }
    let baseline_average =
        target_baselines.iter().map(|(_, b)| b).sum::<f64>() / target_baselines.len() as f64;

    Ok(TcapMatrix {
        labels: synths.iter().map(|(l, _)| l.clone()).collect(),
        configs: configs.to_vec(),
        cells,
        grand_averages,
        target_baselines,
        baseline_average,
    })
}
