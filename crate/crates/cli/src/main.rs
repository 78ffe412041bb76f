use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use subdiff_core::harness::properties::{run_suite, Suite};
use subdiff_core::harness::{
    emit_tables, preset, preset_registry, run_experiment, ExperimentSpec, RunOptions, RunRecord,
    TableFormat,
};

/// Convergence studies for piecewise-constant DG / P1 finite element
/// discretizations of time-fractional diffusion.
#[derive(Debug, Parser)]
#[command(name = "subdiff", version)]
struct Cli {
    /// Directory for reference checkpoints.
    #[arg(long, global = true, default_value = ".subdiff-cache")]
    cache_dir: PathBuf,
    /// Directory receiving tables/ and records/.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads; 0 uses one per core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Seed for the randomized property suites.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a preset by name or an experiment described in a TOML file.
    Run {
        target: String,
        /// Replace the ladder, e.g. `3,4,5,6`.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<u32>>,
        /// Replace the fractional order.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// List the built-in presets.
    ListPresets,
    /// Render a saved run record as a table.
    Emit {
        record: PathBuf,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Run the randomized property suites.
    Properties {
        /// One of mittag-leffler, frac-ops, scheme; all when omitted.
        suite: Option<String>,
    },
}

fn load_spec(target: &str) -> Result<ExperimentSpec> {
    if let Some(spec) = preset(target) {
        return Ok(spec);
    }
    let path = Path::new(target);
    if path.extension().is_some_and(|e| e == "toml") {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok(ExperimentSpec::from_toml(&text)?);
    }
    bail!("{target:?} is neither a preset nor a .toml file; see `subdiff list-presets`")
}

fn print_record(record: &RunRecord) {
    print!("{}", emit_tables(record, TableFormat::Markdown));
    for e in &record.expectations {
        let observed = e.observed.map_or("--".to_string(), |o| format!("{o:.2}"));
        let verdict = if e.passed { "ok" } else { "FAIL" };
        println!(
            "{verdict}: {} order {observed}, expected {:.2} +/- {:.2}",
            e.norm.label(),
            e.expected,
            e.tolerance
        );
    }
    if !record.e1_monotone {
        println!("FAIL: E1 does not decrease along the ladder");
    }
    for l in record.levels.iter().filter(|l| l.error.is_some()) {
        println!(
            "FAIL: level {} aborted: {}",
            l.level,
            l.error.as_deref().unwrap_or_default()
        );
    }
    println!(
        "reference {:.1} s, total {:.1} s",
        record.reference_seconds, record.total_seconds
    );
}

fn run(cli: Cli) -> Result<bool> {
    let options = RunOptions {
        cache_dir: Some(cli.cache_dir.clone()),
        output_dir: Some(cli.out_dir.clone()),
        jobs: cli.jobs,
    };
    match cli.command {
        Command::Run {
            target,
            levels,
            alpha,
        } => {
            let mut spec = load_spec(&target)?;
            if let Some(levels) = levels {
                spec.ladder = levels;
            }
            if let Some(alpha) = alpha {
                spec.alpha = alpha;
            }
            let record = run_experiment(&spec, &options)?;
            print_record(&record);
            Ok(record.passed())
        }
        Command::ListPresets => {
            for p in preset_registry() {
                let scale = if p.desk { "desk" } else { "full" };
                println!("{:<24} {scale:<5} {}", p.name, p.description);
            }
            Ok(true)
        }
        Command::Emit { record, format } => {
            let format: TableFormat = format.parse()?;
            let text = fs::read_to_string(&record)
                .with_context(|| format!("reading {}", record.display()))?;
            print!("{}", emit_tables(&RunRecord::from_json(&text)?, format));
            Ok(true)
        }
        Command::Properties { suite } => {
            let suites: Vec<Suite> = match suite.as_deref() {
                None => Suite::ALL.to_vec(),
                Some(name) => match Suite::ALL.into_iter().find(|s| s.name() == name) {
                    Some(s) => vec![s],
                    None => bail!("unknown suite {name:?}"),
                },
            };
            let mut all = true;
            for s in suites {
                let report = run_suite(s, cli.seed)?;
                println!(
                    "{} (seed {}, {:.1} s)",
                    s.name(),
                    report.seed,
                    report.seconds
                );
                for c in &report.checks {
                    let verdict = if c.passed { "ok" } else { "FAIL" };
                    println!(
                        "  {verdict}: {} = {:.3e} (limit {:e})",
                        c.name, c.measured, c.tolerance
                    );
                }
                all &= report.passed();
            }
            Ok(all)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
