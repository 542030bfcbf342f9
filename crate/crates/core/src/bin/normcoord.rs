use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use normcoord::convergence::{convergence_study, StudyParameter};
use normcoord::metric::catalog::catalog_entries;
use normcoord::report::{run_scenario, RunOptions};
use normcoord::scenario::{Scenario, Suite};

#[derive(Parser)]
#[command(name = "normcoord", version, about = "Verify normal-coordinate constructions on a metric")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and emit a JSON report. Exit status 1 if any check fails.
    Verify {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        suite: Option<Suite>,
        #[arg(long)]
        seed: Option<u64>,
        /// Override residual tolerances (slope windows keep their own).
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        threads: Option<usize>,
        /// Add per-suite wall times; the report is then no longer reproducible byte for byte.
        #[arg(long)]
        timing: bool,
    },
    /// Emit a CSV convergence table.
    Convergence {
        scenario: PathBuf,
        #[arg(long)]
        param: StudyParameter,
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Metric catalog.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
}

fn load(path: &Path) -> anyhow::Result<Scenario> {
    Scenario::from_file(path).with_context(|| format!("loading scenario {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Verify { scenario, out, suite, seed, tol, threads, timing } => {
            let mut s = load(&scenario)?;
            if let Some(su) = suite {
                s.suite = su;
            }
            if let Some(seed) = seed {
                s.seed = seed;
            }
            if let Some(t) = tol {
                if !(t > 0.0) {
                    bail!("--tol must be positive");
                }
                s.tolerance = Some(t);
            }
            if threads == Some(0) {
                bail!("--threads must be at least 1");
            }
            let report = run_scenario(&s, RunOptions { threads, timing })
                .with_context(|| format!("running {}", scenario.display()))?;
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            emit(out.as_deref(), &text)?;
            for r in report.records.iter().filter(|r| !r.pass) {
                eprintln!("FAIL {} computed={:?} expected={} tol={:e}{}", r.name, r.computed, r.expected, r.tolerance,
                    r.error.as_deref().map(|e| format!(" error: {e}")).unwrap_or_default());
            }
            Ok(report.pass)
        }
        Command::Convergence { scenario, param, levels, out } => {
            let s = load(&scenario)?;
            let table = convergence_study(&s, param, levels)
                .with_context(|| format!("{param} study on {}", scenario.display()))?;
            emit(out.as_deref(), &table.to_csv())?;
            Ok(true)
        }
        Command::Catalog { action: CatalogAction::List } => {
            let mut text = String::new();
            for e in catalog_entries() {
                text.push_str(&format!("{}: {}\n", e.name, e.summary));
                for (p, d) in e.parameters {
                    text.push_str(&format!("  {p}: {d}\n"));
                }
            }
            emit(None, &text)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
