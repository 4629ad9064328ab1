//! Experiment harness for `collapsim-core`: configuration, seeded batch
//! execution on a worker pool, and CSV/JSON output.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub use config::{Experiment, ExperimentConfig, Overrides};
pub use error::{CliError, Result};
pub use output::{Metric, Outcome, RunSummary};

/// Environment variable holding the number of worker threads.
pub const WORKERS_ENV: &str = "COLLAPSIM_WORKERS";

/// Worker pool sized by [`WORKERS_ENV`], or by the machine if it is unset.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => {
                return Err(CliError::config(
                    WORKERS_ENV,
                    format!("`{v}` is not a positive integer"),
                ))
            }
        },
        Err(_) => 0,
    };
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}

/// Runs the configured experiment and writes its artifacts and
/// `summary.json` into the output directory. Experiment failures are
/// recorded in the summary rather than returned.
pub fn run(config: &ExperimentConfig) -> Result<RunSummary> {
    let pool = worker_pool()?;
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let clock = Instant::now();
    let result = pool.install(|| experiments::execute(config));
    let (metrics, files, error, passed) = match result {
        Ok(outcome) => {
            let files = output::write_artifacts(&config.out, &outcome)?;
            let passed = outcome.passed();
            (outcome.metrics, files, None, passed)
        }
        Err(e) => (Vec::new(), Vec::new(), Some(e.to_string()), false),
    };
    let summary = RunSummary {
        schema_version: output::SCHEMA_VERSION,
        code_version: env!("CARGO_PKG_VERSION"),
        config: config.clone(),
        passed,
        metrics,
        files,
        error,
        timestamp: output::Timestamp {
            started_unix: started,
            wall_clock_seconds: clock.elapsed().as_secs_f64(),
        },
    };
    output::write_summary(&config.out, &summary)?;
    Ok(summary)
}
