//! `hopfdeco`: scenario-driven batch runner for the conservative-
//! dissipative decomposition toolkit.
//!
//! Exit codes: 0 success, 1 error, 2 any Undecided verdict in `--strict`
//! mode.

mod config;
mod runner;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "hopfdeco")]
#[command(about = "conservative-dissipative decomposition scenarios: estimators, exact engines, reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario config and write the report and series files
    Run {
        config: PathBuf,
        /// Exit with status 2 when any verdict is Undecided
        #[arg(long)]
        strict: bool,
        /// Output directory (default: HOPFDECO_OUT or the current directory)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace the scenario seed
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Print the series rows of one task from a report's series files
    Emit { report: PathBuf, task_id: String },
    /// List the catalog of groups, spaces and group pairs
    Catalog,
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("HOPFDECO_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn cmd_run(config: &Path, strict: bool, out: Option<PathBuf>, seed_override: Option<u64>) -> Result<u8> {
    let text = std::fs::read_to_string(config)
        .with_context(|| format!("reading config {}", config.display()))?;
    let mut scenario = config::parse_config(&text)?;
    if let Some(seed) = seed_override {
        scenario.seed = Some(seed);
        scenario.spec.seed = seed;
    }
    let report = runner::run_scenario(&scenario)?;
    let dir = out_dir(out);
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let report_path = dir.join(format!("{}.report.txt", scenario.id));
    std::fs::write(&report_path, &report.document)
        .with_context(|| format!("writing {}", report_path.display()))?;
    for (stem, contents) in &report.series_files {
        let path = dir.join(format!("{}__{}.series", scenario.id, stem));
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    }
    // wall clock stays out of the report so reruns reproduce bytes exactly
    println!(
        "wrote {} ({} series files), wall-clock {} ms",
        report_path.display(),
        report.series_files.len(),
        report.wall_clock_ms
    );
    if strict && report.undecided_count > 0 {
        eprintln!("strict mode: {} undecided verdicts", report.undecided_count);
        return Ok(2);
    }
    Ok(0)
}

fn cmd_emit(report: &Path, task_id: &str) -> Result<()> {
    let doc = std::fs::read_to_string(report)
        .with_context(|| format!("reading report {}", report.display()))?;
    let scenario = doc
        .lines()
        .find_map(|l| l.strip_prefix("scenario: "))
        .ok_or_else(|| anyhow!("{} is not a hopf report", report.display()))?;
    // series stems referenced by the task's block
    let mut stems: Vec<String> = Vec::new();
    let mut in_task = false;
    for line in doc.lines() {
        if line.starts_with("[task ") {
            in_task = line
                .strip_prefix("[task ")
                .map(|rest| rest.split_whitespace().next() == Some(task_id))
                .unwrap_or(false);
        } else if in_task {
            if let Some(rest) = line.strip_prefix("series-file: ") {
                let stem = rest.split(".series").next().unwrap_or(rest);
                stems.push(stem.to_string());
            }
        }
    }
    if stems.is_empty() {
        return Err(anyhow!("no such task (or no series): {task_id}"));
    }
    let dir = report.parent().unwrap_or_else(|| Path::new("."));
    println!("# scenario {scenario} task {task_id}");
    println!("# window value window_volume");
    for stem in stems {
        let path = dir.join(format!("{scenario}__{stem}.series"));
        let rows = std::fs::read_to_string(&path)
            .with_context(|| format!("reading series {}", path.display()))?;
        print!("{rows}");
    }
    Ok(())
}

fn cmd_catalog() {
    println!("groups:");
    for g in config::group_catalog_names() {
        println!("  {g}");
    }
    println!("spaces:");
    for s in config::space_catalog_names() {
        println!("  {s}");
    }
    println!("pairs:");
    for p in config::pair_catalog_names() {
        println!("  {p}");
    }
    println!("discrete systems: z_on_z | z_on_cyclic_12 | union_z_cyclic | file:PATH");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, strict, out, seed_override } => {
            cmd_run(&config, strict, out, seed_override)
        }
        Command::Emit { report, task_id } => cmd_emit(&report, &task_id).map(|_| 0),
        Command::Catalog => {
            cmd_catalog();
            Ok(0)
        }
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
