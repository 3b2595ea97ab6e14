//! Aggregation and artifact emission: per-synthesizer risk and utility
//! results, risk-utility map points, CSV/JSON artifacts and an SVG scatter.
//!
//! Output is deterministic: fixed key order, floats at 6 significant
//! digits, no wall-clock timestamps.

use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::risk::{tcap_matrix, KeyTargetConfig, TcapResult};
use crate::tabular::{write_csv_string, BinPolicy, Dataset};
use crate::utility::{utility_report, UtilityReport};

/// Rounds to 6 significant digits for reproducible serialization.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

pub fn fmt_sig(x: f64) -> String {
    format!("{}", round_sig(x))
}

pub fn ser_f64<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig(*x))
}

pub fn ser_f64_vec<S: Serializer>(xs: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&round_sig(*x))?;
    }
    seq.end()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuMapPoint {
    pub label: String,
    #[serde(serialize_with = "ser_f64")]
    pub utility: f64,
    #[serde(serialize_with = "ser_f64")]
    pub risk: f64,
    #[serde(serialize_with = "ser_f64")]
    pub baseline_risk: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthEvaluation {
    pub label: String,
    pub risk_cells: Vec<TcapResult>,
    #[serde(serialize_with = "ser_f64")]
    pub grand_tcap: f64,
    pub utility: UtilityReport,
    pub ru_point: RuMapPoint,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorEntry {
    pub label: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy)]
pub struct ReportOptions {
    pub bins: BinPolicy,
    pub level: f64,
    pub weap_threshold: f64,
    pub cio_floor_at_zero: bool,
    pub include_original_point: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            bins: BinPolicy::default(),
            level: 0.95,
            weap_threshold: 1.0,
            cio_floor_at_zero: false,
            include_original_point: true,
        }
    }
}

/// Echo of the options, sufficient to rerun the evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct OptionsEcho {
    pub bin_width: i64,
    #[serde(serialize_with = "ser_f64")]
    pub level: f64,
    #[serde(serialize_with = "ser_f64")]
    pub weap_threshold: f64,
    pub cio_floor_at_zero: bool,
    pub include_original_point: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    pub toolkit_version: String,
    pub dataset_name: String,
    /// SHA-256 of the original data in canonical CSV form.
    pub original_fingerprint: String,
    pub options: OptionsEcho,
    pub configs: Vec<KeyTargetConfig>,
    pub target_baselines: Vec<(String, f64)>,
    /// Unweighted mean of the per-target baselines; note the baseline here
    /// is a toolkit convention (sum of squared marginal shares of the
    /// target), reported alongside every TCAP for context.
    #[serde(serialize_with = "ser_f64")]
    pub baseline_average: f64,
    pub results: Vec<SynthEvaluation>,
    pub errors: Vec<ErrorEntry>,
}

pub fn dataset_fingerprint(ds: &Dataset) -> String {
    let mut hasher = Sha256::new();
    hasher.update(write_csv_string(ds).as_bytes());
    format!("{:x}", hasher.finalize())
}

/// Runs the TCAP matrix and the full utility battery for every labeled
/// synthetic dataset. A failing synthesizer becomes an error entry, not a
/// global failure.
pub fn build_report(
    orig: &Dataset,
    synths: &[(String, Dataset)],
    configs: &[KeyTargetConfig],
    opts: &ReportOptions,
) -> Result<EvaluationReport> {
    if synths.is_empty() {
        return Err(Error::NoSubjects);
    }
    let mut results = Vec::new();
    let mut errors = Vec::new();
    let mut target_baselines: Vec<(String, f64)> = Vec::new();
    let mut baseline_average = f64::NAN;

    for (label, synth) in synths {
        let evaluated = (|| -> Result<SynthEvaluation> {
            let matrix = tcap_matrix(
                orig,
                &[(label.clone(), synth)],
                configs,
                opts.weap_threshold,
            )?;
            let utility = utility_report(orig, synth, &opts.bins, opts.level, opts.cio_floor_at_zero)?;
            let grand_tcap = matrix.grand_averages[0];
            let ru_point = RuMapPoint {
                label: label.clone(),
                utility: utility.overall,
                risk: grand_tcap,
                baseline_risk: matrix.baseline_average,
            };
            if target_baselines.is_empty() {
                target_baselines = matrix.target_baselines.clone();
                baseline_average = matrix.baseline_average;
            }
            Ok(SynthEvaluation {
                label: label.clone(),
                risk_cells: matrix.cells.into_iter().next().unwrap(),
                grand_tcap,
                utility,
                ru_point,
            })
        })();
        match evaluated {
            Ok(r) => results.push(r),
            Err(e) => errors.push(ErrorEntry {
                label: label.clone(),
                message: e.to_string(),
            }),
        }
    }

    if target_baselines.is_empty() {
        // every synthesizer failed; baselines still come from the original
        target_baselines = configs
            .iter()
            .map(|c| c.target.clone())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .map(|t| crate::risk::baseline_cap(orig, &t).map(|b| (t, b)))
            .collect::<Result<Vec<_>>>()?;
        baseline_average =
            target_baselines.iter().map(|(_, b)| b).sum::<f64>() / target_baselines.len() as f64;
    }

    Ok(EvaluationReport {
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        dataset_name: orig.schema().dataset_name.clone(),
        original_fingerprint: dataset_fingerprint(orig),
        options: OptionsEcho {
            bin_width: opts.bins.width,
            level: opts.level,
            weap_threshold: opts.weap_threshold,
            cio_floor_at_zero: opts.cio_floor_at_zero,
            include_original_point: opts.include_original_point,
        },
        configs: configs.to_vec(),
        target_baselines: target_baselines
            .into_iter()
            .map(|(t, b)| (t, round_sig(b)))
            .collect(),
        baseline_average,
        results,
        errors,
    })
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    pub fn ru_points(&self) -> Vec<RuMapPoint> {
        self.results.iter().map(|r| r.ru_point.clone()).collect()
    }
}

/// `label,utility,risk,baseline` rows, original appended as (1,1) when
/// requested.
pub fn emit_ru_map_csv(points: &[RuMapPoint], baseline_avg: f64, include_original: bool) -> String {
    let mut out = String::from("label,utility,risk,baseline\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.label,
            fmt_sig(p.utility),
            fmt_sig(p.risk),
            fmt_sig(baseline_avg)
        ));
    }
    if include_original {
        out.push_str(&format!("original,1,1,{}\n", fmt_sig(baseline_avg)));
    }
    out
}

pub fn parse_ru_map_csv(text: &str) -> Result<Vec<RuMapPoint>> {
    let mut points = Vec::new();
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::InvalidConfig(format!("bad R-U row: {line}")));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::InvalidConfig(format!("bad number {s:?}")))
        };
        points.push(RuMapPoint {
            label: fields[0].to_string(),
            utility: parse(fields[1])?,
            risk: parse(fields[2])?,
            baseline_risk: parse(fields[3])?,
        });
    }
    Ok(points)
}

/// SVG 1.1 scatter: risk on x, utility on y, both axes [0,1], a dashed
/// vertical reference line at the baseline average TCAP.
pub fn emit_ru_map_svg(points: &[RuMapPoint], baseline_avg: f64, include_original: bool) -> String {
    const W: f64 = 480.0;
    const H: f64 = 360.0;
    const ML: f64 = 55.0; // left margin
    const MR: f64 = 20.0;
    const MT: f64 = 25.0;
    const MB: f64 = 45.0;
    let px = |risk: f64| ML + risk * (W - ML - MR);
    let py = |utility: f64| H - MB - utility * (H - MT - MB);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    // axes
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        px(0.0),
        py(0.0),
        px(1.0),
        py(0.0)
    ));
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        px(0.0),
        py(0.0),
        px(0.0),
        py(1.0)
    ));
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\">{}</text>\n",
            px(t),
            py(0.0) + 15.0,
            fmt_sig(t)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{}</text>\n",
            px(0.0) - 6.0,
            py(t) + 3.0,
            fmt_sig(t)
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">TCAP (risk)</text>\n",
        px(0.5),
        H - 8.0
    ));
    svg.push_str(&format!(
        "<text x=\"14\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">Overall utility</text>\n",
        py(0.5),
        py(0.5)
    ));
    // baseline reference line
    svg.push_str(&format!(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n",
        px(baseline_avg),
        py(0.0),
        py(1.0)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"10\" fill=\"gray\">baseline {}</text>\n",
        px(baseline_avg) + 4.0,
        py(1.0) + 10.0,
        fmt_sig(baseline_avg)
    ));

    let mut all: Vec<(&str, f64, f64, &str)> = points
        .iter()
        .map(|p| (p.label.as_str(), p.risk, p.utility, "steelblue"))
        .collect();
    if include_original {
        all.push(("original", 1.0, 1.0, "firebrick"));
    }
    for (label, risk, utility, color) in all {
        svg.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{color}\"/>\n",
            px(risk),
            py(utility)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"10\">{label}</text>\n",
            px(risk) + 6.0,
            py(utility) - 4.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Table-1-style matrix: one row per key/target cell, one column per
/// synthesizer, baseline column last.
pub fn emit_tcap_csv(report: &EvaluationReport) -> String {
    let mut out = String::from("target,keys");
    for r in &report.results {
        out.push_str(&format!(",{}", r.label));
    }
    out.push_str(",baseline\n");
    for (i, cfg) in report.configs.iter().enumerate() {
        out.push_str(&format!("{},{}", cfg.target, cfg.keys.len()));
        let mut baseline = f64::NAN;
        for r in &report.results {
            out.push_str(&format!(",{}", fmt_sig(r.risk_cells[i].tcap)));
            baseline = r.risk_cells[i].baseline;
        }
        if baseline.is_nan() {
            out.push_str(",\n");
        } else {
            out.push_str(&format!(",{}\n", fmt_sig(baseline)));
        }
    }
    out.push_str("average,");
    for r in &report.results {
        out.push_str(&format!(",{}", fmt_sig(r.grand_tcap)));
    }
    out.push_str(&format!(",{}\n", fmt_sig(report.baseline_average)));
    out
}

/// Table-2-style metric rows, one column per synthesizer. A dash marks a
/// CIO that could not be computed.
pub fn emit_utility_csv(report: &EvaluationReport) -> String {
    let mut out = String::from("metric");
    for r in &report.results {
        out.push_str(&format!(",{}", r.label));
    }
    out.push('\n');
    let rows: Vec<(&str, Box<dyn Fn(&SynthEvaluation) -> String>)> = vec![
        ("pmse", Box::new(|r| fmt_sig(r.utility.pmse.pmse))),
        (
            "log_pmse_ratio",
            Box::new(|r| fmt_sig(r.utility.pmse.log_ratio)),
        ),
        ("pmse_scaled", Box::new(|r| fmt_sig(r.utility.pmse.scaled))),
        ("roe_univariate", Box::new(|r| fmt_sig(r.utility.roe_uni))),
        ("roe_bivariate", Box::new(|r| fmt_sig(r.utility.roe_bi))),
        (
            "ci_overlap",
            Box::new(|r| {
                r.utility
                    .cio
                    .as_ref()
                    .map(|c| fmt_sig(c.mean_cio))
                    .unwrap_or_else(|| "-".to_string())
            }),
        ),
        (
            "std_difference",
            Box::new(|r| {
                r.utility
                    .cio
                    .as_ref()
                    .map(|c| fmt_sig(c.mean_std_diff))
                    .unwrap_or_else(|| "-".to_string())
            }),
        ),
        ("overall_utility", Box::new(|r| fmt_sig(r.utility.overall))),
    ];
    for (name, getter) in rows {
        out.push_str(name);
        for r in &report.results {
            out.push_str(&format!(",{}", getter(r)));
        }
        out.push('\n');
    }
    out
}
