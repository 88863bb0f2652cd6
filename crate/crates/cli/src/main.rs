mod args;
mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::Parser;
use serde::Serialize;

use args::{Cli, Command};
use config::{FileConfig, UsageError};

/// Everything needed to rerun a command. Kept apart from the command's own
/// outputs, which must not carry timing information.
#[derive(Debug, Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    argv: Vec<String>,
    config_file: Option<PathBuf>,
    settings: serde_json::Value,
    outputs: Vec<PathBuf>,
    wall_clock_seconds: f64,
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Bounds(_) => "bounds",
        Command::Simulate(_) => "simulate",
        Command::Analytic(_) => "analytic",
        Command::OptimizeMu(_) => "optimize-mu",
        Command::Threshold(_) => "threshold",
        Command::Curve(_) => "curve",
        Command::Table2(_) => "table2",
        Command::Drift(_) => "drift",
    }
}

fn run(cli: Cli) -> Result<()> {
    let start = Instant::now();
    let cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    if let Some(threads) = cli.threads.or(cfg.threads) {
        if threads == 0 {
            return Err(config::usage("--threads must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()?;
    }
    let report = commands::run(&cli.command, &cfg)?;
    std::io::stdout().write_all(report.stdout.as_bytes())?;
    if let Some(path) = &cli.manifest {
        let manifest = RunManifest {
            tool: "matchsim",
            version: env!("CARGO_PKG_VERSION"),
            command: command_name(&cli.command),
            argv: std::env::args().collect(),
            config_file: cli.config.clone(),
            settings: report.settings,
            outputs: report.outputs,
            wall_clock_seconds: start.elapsed().as_secs_f64(),
        };
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        matchsim::output::write_text(path, &text)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                eprintln!("run `matchsim --help` for usage");
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
