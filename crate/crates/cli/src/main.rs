//! `mclab`: run verification suites and decay scans, writing one JSON report
//! per check and one CSV per scan.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod suites;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use meanconvex::Error;
use rayon::prelude::*;

use config::{Overrides, RunConfig, Suite};
use suites::{Check, Outcome};

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "mclab", version, about = "Curvature inequalities for mean convex regions: verification harness")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, env = "MCLAB_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, env = "MCLAB_SUITE", value_enum)]
    suite: Option<Suite>,
    /// Output directory for reports and CSV files.
    #[arg(long, env = "MCLAB_OUT")]
    out: Option<PathBuf>,
    #[arg(long, env = "MCLAB_SEED")]
    seed: Option<u64>,
    #[arg(long, env = "MCLAB_WORKERS")]
    workers: Option<usize>,
    /// Print the selected checks and exit.
    #[arg(long)]
    list_checks: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let overrides = Overrides {
        suite: cli.suite,
        out: cli.out,
        seed: cli.seed,
        workers: cli.workers,
    };
    let cfg = match RunConfig::load(cli.config.as_deref(), overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("mclab: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let checks = suites::checks(&cfg);
    if cli.list_checks {
        for c in &checks {
            println!("{}\t{}", c.suite.name(), c.name);
        }
        return ExitCode::SUCCESS;
    }
    match run(&cfg, &checks) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("mclab: cannot write reports: {e}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}

fn run(cfg: &RunConfig, checks: &[Check]) -> std::io::Result<u8> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(std::io::Error::other)?;
    let results: Vec<meanconvex::Result<Option<Outcome>>> =
        pool.install(|| checks.par_iter().map(|c| c.run(cfg)).collect());

    let mut failed = 0usize;
    let mut diverged = Vec::new();
    for (check, result) in checks.iter().zip(results) {
        let dir = cfg.out.join(check.suite.name());
        match result {
            Ok(Some(outcome)) => {
                let report = outcome.report.seed(cfg.seed);
                if let Some(w) = report.details.get("warning") {
                    log::warn!("{}: {w}", check.name);
                }
                write(&dir, &format!("{}.json", check.name), &report.to_json())?;
                if let Some(csv) = outcome.csv {
                    write(&dir, &format!("{}.csv", check.name), &csv)?;
                }
                let status = match (report.pass, report.probe) {
                    (true, _) => "PASS",
                    (false, true) => "PROBE",
                    (false, false) => "FAIL",
                };
                failed += usize::from(report.failed());
                println!("{status}\t{}/{}\tslack {:e}", check.suite.name(), check.name, report.slack);
            }
            Ok(None) => println!("SKIP\t{}/{}", check.suite.name(), check.name),
            Err(e) => {
                let value = serde_json::json!({
                    "check": check.name,
                    "pass": false,
                    "error": e.to_string(),
                    "seed": cfg.seed,
                });
                let text = serde_json::to_string_pretty(&value).map_err(std::io::Error::other)?;
                write(&dir, &format!("{}.json", check.name), &text)?;
                if matches!(e, Error::NonConvergence { .. } | Error::CurveCollapsed { .. }) {
                    eprintln!("mclab: check {} did not converge: {e}", check.name);
                    diverged.push(check.name.clone());
                } else {
                    failed += 1;
                }
                println!("ERROR\t{}/{}\t{e}", check.suite.name(), check.name);
            }
        }
    }
    Ok(if !diverged.is_empty() {
        EXIT_NONCONVERGENCE
    } else if failed > 0 {
        EXIT_FAIL
    } else {
        0
    })
}

fn write(dir: &Path, file: &str, text: &str) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(file), text)
}
