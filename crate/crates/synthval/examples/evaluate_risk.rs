//! Disclosure-risk grid: WEAP-filtered TCAP for every target crossed with
//! every key set, for both baseline synthesizers, printed against the
//! marginal baseline CAP.

use std::path::Path;

use synthval::config::RiskConfig;
use synthval::risk::tcap_matrix;
use synthval::simdata::default_rules;
use synthval::synth::{
    apply_rules, order_variables, synth_cart_sequential, synth_marginal, CartParams, OrderPolicy,
};
use synthval::tabular::{load_csv, Schema};

fn main() -> synthval::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let schema_text = std::fs::read_to_string(root.join("data/simsars_schema.json"))
        .expect("read committed schema fixture");
    let schema = Schema::from_json(&schema_text)?;
    let orig = load_csv(root.join("data/simsars.csv"), &schema)?;
    let configs = RiskConfig::load(&root.join("data/risk.json"))?.expand();
    let rules = default_rules();
    let n = orig.n_rows();

    let (marginal, _) = apply_rules(&synth_marginal(&orig, n, 17)?, &rules)?;
    let order = order_variables(&orig, OrderPolicy::CategoryCount, None)?;
    let cart = synth_cart_sequential(&orig, &order, &rules, &CartParams::default(), n, 17)?.data;

    let synths = [("marginal".to_string(), &marginal), ("cart".to_string(), &cart)];
    let matrix = tcap_matrix(&orig, &synths, &configs, 1.0)?;

    println!("{:<16} {:>9} {:>9} {:>9}", "target|keys", "marginal", "cart", "baseline");
    for (i, cfg) in configs.iter().enumerate() {
        let baseline = matrix
            .target_baselines
            .iter()
            .find(|(t, _)| *t == cfg.target)
            .map(|(_, b)| *b)
            .unwrap_or(f64::NAN);
        println!(
            "{:<16} {:>9.3} {:>9.3} {:>9.3}",
            cfg.label, matrix.cells[0][i].tcap, matrix.cells[1][i].tcap, baseline
        );
    }
    println!(
        "{:<16} {:>9.3} {:>9.3} {:>9.3}",
        "average", matrix.grand_averages[0], matrix.grand_averages[1], matrix.baseline_average
    );
    Ok(())
}
