//! Simulated census-style microdata with planted dependencies.
//!
//! Real census microdata samples are license-restricted, so the shipped
//! corpus is a schema-compatible simulation: twelve variables (one integer
//! age, eleven categorical) with age-driven marital status, economic
//! position, illness and family structure, plus four deterministic data
//! rules. It exists to exercise the pipeline, not to mimic real marginals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::synth::{load_rules, DataRule};
use crate::tabular::{Column, Dataset, Schema, VariableSpec};

fn labels(k: usize) -> Vec<String> {
    (1..=k).map(|i| i.to_string()).collect()
}

/// Twelve-variable census-style schema (area, demographics, work, housing).
pub fn sars_schema() -> Schema {
    let cat = |name: &str, k: usize| {
        let ls = labels(k);
        let refs: Vec<&str> = ls.iter().map(String::as_str).collect();
        VariableSpec::categorical(name, &refs)
    };
    Schema::new(
        "simsars",
        vec![
            cat("AREAP", 21),
            VariableSpec::integer("AGE", 0, 95),
            cat("COBIRTH", 13),
            cat("ECONPRIM", 10),
            cat("ETHGROUP", 10),
            cat("FAMTYPE", 9),
            cat("LTILL", 2),
            cat("MSTATUS", 5),
            VariableSpec::categorical("QUALNUM", &["0", "1", "2"]),
            cat("SEX", 2),
            cat("SOCLASS", 9),
            cat("TENURE", 7).with_missing(),
        ],
    )
    .expect("static schema")
}

/// The four deterministic rules the corpus satisfies by construction.
pub fn default_rules() -> Vec<DataRule> {
    load_rules(DEFAULT_RULES_JSON).expect("static rules")
}

pub const DEFAULT_RULES_JSON: &str = r#"[
  {"if": [{"var": "AGE", "op": "<=", "value": 15}], "then": {"var": "MSTATUS", "value": "1"}},
  {"if": [{"var": "AGE", "op": "<=", "value": 15}], "then": {"var": "ECONPRIM", "value": "10"}},
  {"if": [{"var": "AGE", "op": "<=", "value": 17}], "then": {"var": "QUALNUM", "value": "0"}},
  {"if": [{"var": "ECONPRIM", "op": "=", "value": "10"}], "then": {"var": "SOCLASS", "value": "9"}}
]
"#;

/// Default key/target grid: three targets crossed with nested key sets of
/// six down to three variables.
pub const DEFAULT_RISK_JSON: &str = r#"{
  "targets": ["LTILL", "FAMTYPE", "TENURE"],
  "key_sets": [
    ["AREAP", "AGE", "SEX", "MSTATUS", "ETHGROUP", "ECONPRIM"],
    ["AREAP", "AGE", "SEX", "MSTATUS", "ETHGROUP"],
    ["AREAP", "AGE", "SEX", "MSTATUS"],
    ["AREAP", "AGE", "SEX"]
  ]
}
"#;

fn pick(rng: &mut ChaCha12Rng, weights: &[f64]) -> u32 {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        u -= w;
        if u <= 0.0 {
            return i as u32;
        }
    }
    (weights.len() - 1) as u32
}

/// Generates `n` rows. Deterministic given the seed.
pub fn simulated_corpus(n: usize, seed: u64) -> Dataset {
    let schema = sars_schema();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let mut areap = Vec::with_capacity(n);
    let mut age = Vec::with_capacity(n);
    let mut cobirth = Vec::with_capacity(n);
    let mut econprim = Vec::with_capacity(n);
    let mut ethgroup = Vec::with_capacity(n);
    let mut famtype = Vec::with_capacity(n);
    let mut ltill = Vec::with_capacity(n);
    let mut mstatus = Vec::with_capacity(n);
    let mut qualnum = Vec::with_capacity(n);
    let mut sex = Vec::with_capacity(n);
    let mut soclass = Vec::with_capacity(n);
    let mut tenure = Vec::with_capacity(n);

    // area weights decay so small areas stay sparse
    let area_w: Vec<f64> = (0..21).map(|i| 1.0 / (i as f64 + 2.0)).collect();
    let eth_w = [80.0, 4.0, 3.0, 2.0, 2.0, 2.0, 2.0, 2.0, 1.5, 1.5];

    for _ in 0..n {
        let a: i64 = match pick(&mut rng, &[0.20, 0.62, 0.18]) {
            0 => rng.gen_range(0..=15),
            1 => rng.gen_range(16..=64),
            _ => rng.gen_range(65..=95),
        };
        age.push(Some(a));
        sex.push(pick(&mut rng, &[0.49, 0.51]));
        areap.push(pick(&mut rng, &area_w));

        let eth = pick(&mut rng, &eth_w);
        ethgroup.push(eth);
        let cob = if eth == 0 {
            if rng.gen::<f64>() < 0.92 {
                0
            } else {
                rng.gen_range(1..13)
            }
        } else if rng.gen::<f64>() < 0.35 {
            0
        } else {
            rng.gen_range(1..13)
        };
        cobirth.push(cob);

        let ms = if a <= 15 {
            0
        } else if a <= 24 {
            pick(&mut rng, &[0.85, 0.13, 0.01, 0.01, 0.0])
        } else if a <= 44 {
            pick(&mut rng, &[0.25, 0.60, 0.05, 0.09, 0.01])
        } else if a <= 64 {
            pick(&mut rng, &[0.10, 0.63, 0.10, 0.12, 0.05])
        } else {
            pick(&mut rng, &[0.05, 0.55, 0.06, 0.08, 0.26])
        };
        mstatus.push(ms);

        let econ = if a <= 15 {
            9
        } else if a <= 24 {
            pick(&mut rng, &[0.45, 0.03, 0.12, 0.30, 0.02, 0.02, 0.02, 0.02, 0.02, 0.0])
        } else if a <= 64 {
            pick(&mut rng, &[0.62, 0.10, 0.07, 0.02, 0.05, 0.04, 0.04, 0.03, 0.03, 0.0])
        } else {
            pick(&mut rng, &[0.05, 0.02, 0.01, 0.0, 0.02, 0.80, 0.05, 0.03, 0.02, 0.0])
        };
        econprim.push(econ);

        // long-term illness rises with age
        let p_ill = 0.03 + 0.6 / (1.0 + (-(a as f64 - 60.0) / 12.0).exp());
        ltill.push(u32::from(rng.gen::<f64>() < p_ill));

        let fam = if a <= 15 {
            pick(&mut rng, &[0.55, 0.25, 0.20, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
        } else if ms == 1 || ms == 2 {
            pick(&mut rng, &[0.0, 0.0, 0.0, 0.45, 0.30, 0.15, 0.05, 0.03, 0.02])
        } else if ms == 4 {
            pick(&mut rng, &[0.0, 0.0, 0.05, 0.05, 0.05, 0.05, 0.15, 0.15, 0.50])
        } else {
            pick(&mut rng, &[0.05, 0.05, 0.10, 0.05, 0.05, 0.05, 0.35, 0.25, 0.05])
        };
        famtype.push(fam);

        let soc = if econ == 9 {
            8
        } else if econ <= 1 {
            pick(&mut rng, &[0.10, 0.15, 0.25, 0.20, 0.15, 0.08, 0.04, 0.03, 0.0])
        } else {
            pick(&mut rng, &[0.03, 0.07, 0.15, 0.20, 0.20, 0.15, 0.10, 0.10, 0.0])
        };
        soclass.push(soc);

        let qn = if a <= 17 {
            0
        } else if soc <= 1 {
            pick(&mut rng, &[0.35, 0.35, 0.30])
        } else if soc <= 4 {
            pick(&mut rng, &[0.60, 0.30, 0.10])
        } else {
            pick(&mut rng, &[0.80, 0.15, 0.05])
        };
        qualnum.push(qn);

        let ten = if rng.gen::<f64>() < 0.04 {
            7 // missing category
        } else if soc <= 2 {
            pick(&mut rng, &[0.60, 0.15, 0.08, 0.07, 0.05, 0.03, 0.02])
        } else {
            pick(&mut rng, &[0.25, 0.15, 0.15, 0.15, 0.15, 0.10, 0.05])
        };
        tenure.push(ten);
    }

    Dataset::new(
        schema,
        vec![
            Column::Cat(areap),
            Column::Int(age),
            Column::Cat(cobirth),
            Column::Cat(econprim),
            Column::Cat(ethgroup),
            Column::Cat(famtype),
            Column::Cat(ltill),
            Column::Cat(mstatus),
            Column::Cat(qualnum),
            Column::Cat(sex),
            Column::Cat(soclass),
            Column::Cat(tenure),
        ],
    )
    .expect("generated data fits the schema")
}
