use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use phidiss_cli::{run, write_outputs, RunConfig, EXIT_ERROR};

/// Runs one dissipativity, verification or FEM pipeline from a TOML config.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// Run configuration (TOML).
    config: PathBuf,
    /// Overrides `output.report`.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Overrides `output.plot_dir`.
    #[arg(long)]
    plot_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}

fn execute(args: &Args) -> anyhow::Result<i32> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(r) = &args.report {
        cfg.output.report = r.clone();
    }
    if let Some(d) = &args.plot_dir {
        cfg.output.plot_dir = Some(d.clone());
    }
    let outcome = run(&cfg)?;
    let code = write_outputs(&outcome, &cfg.output.report, cfg.output.plot_dir.as_deref())?;
    for name in &outcome.failures {
        eprintln!("failed record: {name}");
    }
    Ok(code)
}
