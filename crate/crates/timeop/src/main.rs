//! Batch driver: run verification suites from a declarative config and emit
//! machine-readable reports and plot data.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use timeop::config::{ObservableMode, OutputFormat, RunConfig};
use timeop::suites::{refinement_sweep, run_report};

#[derive(Parser)]
#[command(
    name = "timeop",
    about = "Half-line operator laboratory: multiplication and derivative operators, \
             Friedrichs extensions, the square-root observable and its time representation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Path to a TOML run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Report format: json or csv (overrides the config).
    #[arg(long)]
    format: Option<String>,

    /// Observable mode: time, halfline-momentum or radial-momentum
    /// (overrides the config).
    #[arg(long)]
    mode: Option<String>,

    /// Reserved; all current computations are deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured verification suites and write one report per suite
    /// per grid. Exits nonzero when any check fails.
    Report(CommonArgs),
    /// Run the refinement sweep across the configured grid family and write
    /// convergence and staircase plot data.
    Sweep(CommonArgs),
    /// Print the observable-mode symbol tables.
    Modes {
        /// Show only one mode.
        #[arg(long)]
        mode: Option<String>,
    },
}

fn load_config(args: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)
            .with_context(|| format!("failed to load config {}", path.display()))?,
        None => RunConfig::default(),
    };
    if let Some(out) = &args.out {
        cfg.output.dir = out.clone();
    }
    if let Some(fmt) = &args.format {
        cfg.output.format = OutputFormat::parse(fmt)?;
    }
    if let Some(mode) = &args.mode {
        cfg.mode = ObservableMode::parse(mode)?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = Some(seed);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Report(args) => {
            let cfg = load_config(&args)?;
            let outcome = run_report(&cfg)?;
            for report in &outcome.reports {
                let (passed, total) = (
                    report.checks.iter().filter(|c| c.pass).count(),
                    report.checks.len(),
                );
                println!(
                    "{} [{} n={}]: {}/{} checks pass",
                    report.suite, report.mode, report.grid.n, passed, total
                );
                for check in report.checks.iter().filter(|c| !c.pass) {
                    println!(
                        "  FAIL {} ({}) measured {:.6e} vs {:.6e}",
                        check.id, check.paper_anchor, check.measured, check.tolerance
                    );
                }
            }
            println!(
                "wrote {} report file(s) to {}",
                outcome.files.len(),
                cfg.output.dir.display()
            );
            Ok(outcome.all_pass)
        }
        Command::Sweep(args) => {
            let cfg = load_config(&args)?;
            let outcome = refinement_sweep(&cfg)?;
            let mut seen = std::collections::BTreeSet::new();
            for row in &outcome.rows {
                if seen.insert(row.check_id.clone()) {
                    println!("{}: fitted order {:.2}", row.check_id, row.fitted_order);
                }
            }
            for file in &outcome.files {
                println!("wrote {}", file.display());
            }
            Ok(true)
        }
        Command::Modes { mode } => {
            let modes: Vec<ObservableMode> = match mode {
                Some(m) => vec![ObservableMode::parse(&m)?],
                None => vec![
                    ObservableMode::Time,
                    ObservableMode::HalflineMomentum,
                    ObservableMode::RadialMomentum,
                ],
            };
            for m in modes {
                let s = m.symbols();
                println!(
                    "{}: variable={} conjugate={} multiplication={} derivative={} sqrt={}",
                    m.as_str(),
                    s.variable,
                    s.conjugate,
                    s.multiplication_operator,
                    s.derivative_operator,
                    s.sqrt_operator
                );
            }
            Ok(true)
        }
    }
}
