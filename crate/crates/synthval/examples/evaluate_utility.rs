//! Utility battery for one synthetic dataset: univariate and bivariate ROE,
//! pMSE with the null-expectation diagnostics, CIO with standardized
//! coefficient differences, and the overall score.

use std::path::Path;

use synthval::simdata::default_rules;
use synthval::synth::{order_variables, synth_cart_sequential, CartParams, OrderPolicy};
use synthval::tabular::{load_csv, BinPolicy, Schema};
use synthval::utility::utility_report;

fn main() -> synthval::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let schema_text = std::fs::read_to_string(root.join("data/simsars_schema.json"))
        .expect("read committed schema fixture");
    let schema = Schema::from_json(&schema_text)?;
    let orig = load_csv(root.join("data/simsars.csv"), &schema)?;

    let order = order_variables(&orig, OrderPolicy::CategoryCount, None)?;
    let synth = synth_cart_sequential(
        &orig,
        &order,
        &default_rules(),
        &CartParams::default(),
        orig.n_rows(),
        17,
    )?
    .data;

    let report = utility_report(&orig, &synth, &BinPolicy::default(), 0.95, false)?;
    println!("ROE univariate   {:.3}", report.roe_uni);
    println!("ROE bivariate    {:.3}", report.roe_bi);
    println!(
        "pMSE             {:.6} (ratio {:.3}, 1-4pMSE {:.4})",
        report.pmse.pmse, report.pmse.ratio, report.pmse.scaled
    );
    match &report.cio {
        Some(cio) => println!(
            "CIO              {:.3} over {} models ({} failed), mean std diff {:.3}",
            cio.mean_cio,
            cio.per_model.len(),
            cio.n_failed,
            cio.mean_std_diff
        ),
        None => println!("CIO              - (no model could be fit)"),
    }
    println!("overall utility  {:.3}", report.overall);
    Ok(())
}
