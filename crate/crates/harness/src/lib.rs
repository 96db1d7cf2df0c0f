//! Experiment runner behind the `tessgof` command.

pub mod config;
pub mod error;
pub mod formats;
pub mod gof;
pub mod runner;

pub use config::{Experiment, ExperimentConfig};
pub use error::{exit, HarnessError};
pub use gof::{parse_stat, run_gof_on_import, GofOutcome};
pub use runner::{format_tables, run_experiment, RunOutput};

/// Environment variable that overrides the configured worker count.
pub const WORKERS_ENV: &str = "TESSGOF_WORKERS";

/// Worker count from the environment, else from the config. `None` leaves
/// the choice to rayon.
pub fn worker_count(configured: Option<usize>) -> Result<Option<usize>, HarnessError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(HarnessError::Config(format!(
                "{WORKERS_ENV}: expected a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(configured),
    }
}

/// Runs `f` on a pool of `workers` threads.
pub fn with_workers<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, HarnessError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start {workers:?} workers: {e}")))?;
    Ok(pool.install(f))
}
