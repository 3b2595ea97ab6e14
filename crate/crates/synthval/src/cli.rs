//! Command-line front end. Thin by design: every subcommand is a small
//! wrapper over library calls so the same behavior is scriptable from Rust.
//!
//! Exit codes: 0 success, 1 fatal error, 2 partial failure (some
//! synthesizers evaluated, some failed), 64 usage error.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{RiskConfig, RunConfig};
use crate::error::{Error, Result};
use crate::report::{
    build_report, emit_ru_map_csv, emit_ru_map_svg, emit_tcap_csv, emit_utility_csv, ReportOptions,
};
use crate::synth::{
    load_rules, order_variables, synth_cart_sequential, synth_marginal, CartParams, DataRule,
    OrderPolicy, SynthOutput,
};
use crate::tabular::{infer_schema, load_csv, write_csv, BinPolicy, Dataset, Schema};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FATAL: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "synthval",
    version,
    about = "Evaluate synthetic microdata: disclosure risk (TCAP) vs utility (ROE, pMSE, CIO)"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthMethod {
    Marginal,
    Cart,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full risk/utility evaluation and write the artifact set.
    Evaluate {
        /// Run configuration JSON.
        #[arg(long)]
        config: PathBuf,
        /// Worker threads for per-cell metric evaluation (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Generate a synthetic dataset from the configured original.
    Synth {
        /// Run configuration JSON.
        #[arg(long)]
        config: PathBuf,
        /// Synthesis method.
        #[arg(long, value_enum)]
        method: SynthMethod,
        /// Number of rows to generate.
        #[arg(long)]
        n: usize,
        /// Label; the output file is `<label>.csv` in the output directory.
        #[arg(long)]
        label: String,
    },
    /// Infer a schema from a CSV file.
    Schema {
        /// Input CSV.
        #[arg(long = "in")]
        input: PathBuf,
        /// Treat these columns as integers (repeatable).
        #[arg(long = "int-hint")]
        int_hints: Vec<String>,
        /// Output schema JSON path.
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `args` (including argv[0]) and runs the command, returning the
/// process exit code. `main` is a one-line wrapper over this.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version via "errors" that should exit 0
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Evaluate { config, jobs } => cmd_evaluate(&config, jobs),
        Command::Synth {
            config,
            method,
            n,
            label,
        } => cmd_synth(&config, method, n, &label),
        Command::Schema {
            input,
            int_hints,
            out,
        } => cmd_schema(&input, &int_hints, &out),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FATAL
        }
    }
}

struct LoadedRun {
    cfg: RunConfig,
    schema: Schema,
    original: Dataset,
    rules: Vec<DataRule>,
    output_dir: PathBuf,
}

fn load_run(config_path: &Path) -> Result<LoadedRun> {
    let cfg = RunConfig::load(config_path)?;
    let schema_path = cfg.resolve(config_path, &cfg.schema);
    let schema_text = std::fs::read_to_string(&schema_path).map_err(|source| Error::Io {
        path: schema_path.display().to_string(),
        source,
    })?;
    let schema = Schema::from_json(&schema_text)?;
    let original = load_csv(&cfg.resolve(config_path, &cfg.original), &schema)?;
    let rules = match &cfg.rules {
        Some(p) => {
            let path = cfg.resolve(config_path, p);
            let text = std::fs::read_to_string(&path).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            let rules = load_rules(&text)?;
            for rule in &rules {
                rule.validate(&original)?;
            }
            rules
        }
        None => Vec::new(),
    };
    let output_dir = cfg.resolve(config_path, &cfg.output_dir);
    std::fs::create_dir_all(&output_dir).map_err(|source| Error::Io {
        path: output_dir.display().to_string(),
        source,
    })?;
    Ok(LoadedRun {
        cfg,
        schema,
        original,
        rules,
        output_dir,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn cmd_evaluate(config_path: &Path, jobs: Option<usize>) -> Result<i32> {
    if let Some(n) = jobs {
        // ignore failure: a global pool may already exist (e.g. in tests)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let run = load_run(config_path)?;
    let risk = RiskConfig::load(&run.cfg.resolve(config_path, &run.cfg.risk))?;
    let configs = risk.expand();

    let mut synths: Vec<(String, Dataset)> = Vec::new();
    let mut load_failures = 0usize;
    for entry in &run.cfg.synthetic {
        match load_csv(&run.cfg.resolve(config_path, &entry.path), &run.schema) {
            Ok(ds) => synths.push((entry.label.clone(), ds)),
            Err(e) => {
                eprintln!("warning: skipping {:?}: {e}", entry.label);
                load_failures += 1;
            }
        }
    }
    if synths.is_empty() {
        return Err(Error::NoSubjects);
    }

    let opts = ReportOptions {
        bins: BinPolicy {
            width: run.cfg.bin_width,
        },
        cio_floor_at_zero: run.cfg.cio_floor_at_zero,
        include_original_point: run.cfg.include_original_point,
        ..ReportOptions::default()
    };
    let report = build_report(&run.original, &synths, &configs, &opts)?;

    let points = report.ru_points();
    write_text(&run.output_dir.join("report.json"), &report.to_json())?;
    write_text(&run.output_dir.join("tcap.csv"), &emit_tcap_csv(&report))?;
    write_text(
        &run.output_dir.join("utility.csv"),
        &emit_utility_csv(&report),
    )?;
    write_text(
        &run.output_dir.join("rumap.csv"),
        &emit_ru_map_csv(&points, report.baseline_average, opts.include_original_point),
    )?;
    write_text(
        &run.output_dir.join("rumap.svg"),
        &emit_ru_map_svg(&points, report.baseline_average, opts.include_original_point),
    )?;

    for err in &report.errors {
        eprintln!("warning: {}: {}", err.label, err.message);
    }
    if load_failures > 0 || !report.errors.is_empty() {
        Ok(EXIT_PARTIAL)
    } else {
        Ok(EXIT_OK)
    }
}

pub fn cmd_synth(config_path: &Path, method: SynthMethod, n: usize, label: &str) -> Result<i32> {
    if n == 0 {
        return Err(Error::InvalidConfig("n must be at least 1".into()));
    }
    let run = load_run(config_path)?;
    let out = match method {
        SynthMethod::Marginal => {
            let data = synth_marginal(&run.original, n, run.cfg.seed)?;
            let (data, rule_violations) = if run.rules.is_empty() {
                (data, 0)
            } else {
                crate::synth::apply_rules(&data, &run.rules)?
            };
            SynthOutput {
                data,
                rule_violations,
            }
        }
        SynthMethod::Cart => {
            let order = order_variables(&run.original, OrderPolicy::CategoryCount, None)?;
            synth_cart_sequential(
                &run.original,
                &order,
                &run.rules,
                &CartParams::default(),
                n,
                run.cfg.seed,
            )?
        }
    };
    let path = run.output_dir.join(format!("{label}.csv"));
    write_csv(&out.data, &path)?;
    println!(
        "wrote {} ({n} rows, {} rule violations before enforcement)",
        path.display(),
        out.rule_violations
    );
    Ok(EXIT_OK)
}

pub fn cmd_schema(input: &Path, int_hints: &[String], out: &Path) -> Result<i32> {
    let hints: BTreeSet<String> = int_hints.iter().cloned().collect();
    let schema = infer_schema(input, &hints)?;
    write_text(out, &schema.to_json())?;
    println!("wrote {} ({} variables)", out.display(), schema.variables.len());
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_required_flag_is_usage_error() {
        assert_eq!(run(["synthval", "synth", "--config", "x.json"]), EXIT_USAGE);
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        assert_eq!(run(["synthval", "frobnicate"]), EXIT_USAGE);
    }

    #[test]
    fn help_exits_cleanly() {
        assert_eq!(run(["synthval", "--help"]), EXIT_OK);
    }

    #[test]
    fn missing_config_file_is_fatal() {
        assert_eq!(
            run(["synthval", "evaluate", "--config", "/nonexistent/run.json"]),
            EXIT_FATAL
        );
    }
}
