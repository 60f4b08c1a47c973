//! Batch front-end: reads a TOML run config, runs one command and writes a
//! line-delimited JSON report plus CSV plot data.

pub mod config;
pub mod run;

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;

pub use config::RunConfig;
pub use run::{run, Outcome};

/// Exit status of a successful run with no failed record.
pub const EXIT_OK: i32 = 0;
/// A verdict is negative or a check failed.
pub const EXIT_NEGATIVE: i32 = 2;
/// Invalid configuration or a numerical failure.
pub const EXIT_ERROR: i32 = 3;

/// Report body: one JSON record per line.
pub fn render(outcome: &Outcome) -> anyhow::Result<String> {
    let mut s = String::new();
    for r in &outcome.records {
        s.push_str(&serde_json::to_string(r)?);
        s.push('\n');
    }
    Ok(s)
}

/// Writes the report and the plot files, returning the exit status.
pub fn write_outputs(outcome: &Outcome, report: &Path, plot_dir: Option<&Path>) -> anyhow::Result<i32> {
    if let Some(dir) = report.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut f = fs::File::create(report).with_context(|| format!("creating {}", report.display()))?;
    f.write_all(render(outcome)?.as_bytes())?;
    if let Some(dir) = plot_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, text) in &outcome.plots {
            fs::write(dir.join(name), text).with_context(|| format!("writing {name}"))?;
        }
    }
    Ok(if outcome.failures.is_empty() { EXIT_OK } else { EXIT_NEGATIVE })
}
