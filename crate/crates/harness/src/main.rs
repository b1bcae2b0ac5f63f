use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use kac_harness::config::{ExperimentConfig, ExperimentKind};
use kac_harness::experiments::run_experiment;
use kac_harness::output::persist;

#[derive(Parser)]
#[command(name = "kac-harness", version, about = "Experiments on the boundary-driven Kac lattice gas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Experiment configuration (flat `key = value` file).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; defaults to `output` in the config or `runs/<kind>`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    replicas: Option<usize>,
    /// Worker threads for replica pools.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Exact-generator comparisons on a tiny lattice.
    Oracle,
    /// Hydrodynamic convergence sweep over N.
    Hydro,
    /// Stationary current pairings.
    Current,
    /// Tilted dynamics against the controlled PDE, with Girsanov weights.
    Tilt,
    /// Rate functionals on a PDE-generated or stored path pair.
    Rate,
    /// Time-averaged stationary profile.
    Stationary,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Command::Oracle => ExperimentKind::Oracle,
            Command::Hydro => ExperimentKind::Hydro,
            Command::Current => ExperimentKind::Current,
            Command::Tilt => ExperimentKind::Tilt,
            Command::Rate => ExperimentKind::Rate,
            Command::Stationary => ExperimentKind::Stationary,
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let kind = cli.command.kind();
    let g = cli.global;
    if let Some(t) = g.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let mut cfg = match &g.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(r) = g.replicas {
        cfg.replicas = r;
    }
    cfg.experiment = Some(kind);
    cfg.validate()?;
    let dir = g
        .out
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs").join(kind.name()));
    let start = Instant::now();
    let out = run_experiment(kind, &cfg)?;
    let record = persist(kind, &cfg, &out, start.elapsed().as_secs_f64(), &dir)?;
    let mut stdout = io::stdout().lock();
    for c in &out.checks {
        let _ = writeln!(stdout, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let _ = writeln!(stdout, "wrote {} files to {}", record.outputs.len() + 2, dir.display());
    Ok(record.passed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
