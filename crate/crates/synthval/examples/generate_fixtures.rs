//! Regenerates the committed fixture set under `data/`: the simulated
//! 10k-row corpus, its schema, the risk grid, the data rules, and a ready
//! to run evaluation config. Rerunning is a no-op byte-for-byte.

use std::path::Path;

use synthval::simdata::{simulated_corpus, DEFAULT_RISK_JSON, DEFAULT_RULES_JSON};
use synthval::tabular::write_csv;

const FIXTURE_ROWS: usize = 10_000;
const FIXTURE_SEED: u64 = 17;

const RUN_JSON: &str = r#"{
  "original": "simsars.csv",
  "schema": "simsars_schema.json",
  "synthetic": [
    { "label": "marginal", "path": "../out/marginal.csv" },
    { "label": "cart", "path": "../out/cart.csv" }
  ],
  "risk": "risk.json",
  "rules": "rules.json",
  "seed": 17,
  "output_dir": "../out"
}
"#;

fn main() -> synthval::Result<()> {
    let data_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    std::fs::create_dir_all(&data_dir).expect("create data dir");

    let corpus = simulated_corpus(FIXTURE_ROWS, FIXTURE_SEED);
    write_csv(&corpus, data_dir.join("simsars.csv"))?;
    std::fs::write(
        data_dir.join("simsars_schema.json"),
        corpus.schema().to_json(),
    )
    .expect("write schema");
    std::fs::write(data_dir.join("risk.json"), DEFAULT_RISK_JSON).expect("write risk config");
    std::fs::write(data_dir.join("rules.json"), DEFAULT_RULES_JSON).expect("write rules");
    std::fs::write(data_dir.join("run.json"), RUN_JSON).expect("write run config");

    println!(
        "wrote {} fixtures ({} rows, seed {})",
        data_dir.display(),
        FIXTURE_ROWS,
        FIXTURE_SEED
    );
    Ok(())
}
