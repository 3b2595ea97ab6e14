//! Schema inference from a raw CSV: distinct values become sorted category
//! lists, hinted columns become integer ranges, empty cells mark a variable
//! as permitting missing values.

use std::collections::BTreeSet;
use std::path::Path;

use synthval::tabular::infer_schema;

fn main() -> synthval::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let hints: BTreeSet<String> = ["AGE".to_string()].into();
    let schema = infer_schema(root.join("data/simsars.csv"), &hints)?;
    println!("{}", schema.to_json());
    Ok(())
}
