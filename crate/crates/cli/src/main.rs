use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, ValueEnum};
use tricho_cli::{emit, run, Format, Overrides, Scenario};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Both,
}

/// Run a trichotomy scenario and write its reports.
///
/// Exit status: 0 when every requested check passes, 1 when one fails,
/// 2 on a parse or structural error. TRICHO_THREADS caps the worker threads.
#[derive(Debug, Parser)]
#[command(name = "tricho", version)]
struct Args {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "tricho-out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    format: FormatArg,
    /// Overrides grid.t_max.
    #[arg(long)]
    grid_max: Option<f64>,
    /// Overrides grid.step.
    #[arg(long)]
    grid_step: Option<f64>,
    /// Overrides the norm horizon.
    #[arg(long)]
    horizon: Option<f64>,
    /// Overrides tolerances.theorem.
    #[arg(long)]
    tol: Option<f64>,
    /// Overrides the sampling seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("TRICHO_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("TRICHO_THREADS must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let overrides = Overrides {
        grid_max: args.grid_max,
        grid_step: args.grid_step,
        horizon: args.horizon,
        tol: args.tol,
        seed: args.seed,
    };
    let scenario = match Scenario::from_path(&args.scenario, &overrides) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let started = Instant::now();
    let report = run(&scenario);
    let elapsed = started.elapsed();
    let format = match args.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
        FormatArg::Both => Format::Both,
    };
    let written = match emit(&report, format, &args.out) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: cannot write reports to {}: {e}", args.out.display());
            return ExitCode::from(2);
        }
    };
    for e in &report.entries {
        match &e.reason {
            Some(r) => println!("{:<20} {:<8} {r}", e.kind.name(), e.status.name()),
            None => println!("{:<20} {}", e.kind.name(), e.status.name()),
        }
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for p in &written {
        eprintln!("wrote {}", p.display());
    }
    // Timing goes to stderr only; report files stay byte-stable.
    eprintln!("finished in {:.3} s", elapsed.as_secs_f64());
    ExitCode::from(report.exit_code() as u8)
}
