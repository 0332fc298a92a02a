//! Experiment driver for the swlab kernels: config files, a bounded rayon
//! pool, deterministic CSV/JSON outputs and run manifests.

pub mod config;
pub mod diff;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::PathBuf;
use std::time::Instant;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
pub use experiments::{execute, Experiment};
pub use output::{ExperimentOutput, RunManifest};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "SWLAB_THREADS";

#[derive(Debug, Clone)]
pub struct RunRequest {
    pub experiment: Experiment,
    pub config: ExperimentConfig,
    /// Overrides the config seed.
    pub seed: Option<u64>,
    /// Overrides the config output prefix.
    pub out: Option<PathBuf>,
    /// Overrides SWLAB_THREADS.
    pub threads: Option<usize>,
}

pub fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::config(format!("{THREADS_ENV} must be a positive integer, got '{s}'"))),
        },
    }
}

pub fn run(req: RunRequest) -> CliResult<RunManifest> {
    let name = req.experiment.name();
    if let Some(e) = &req.config.experiment {
        if e != name {
            return Err(CliError::config(format!("config is for '{e}' but the subcommand is '{name}'")));
        }
    }
    let seed = req.seed.or(req.config.seed).unwrap_or(0);
    let prefix = req
        .out
        .clone()
        .or_else(|| req.config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(format!("swlab-{name}")));
    let threads = match req.threads {
        Some(n) => n.max(1),
        None => threads_from_env()?.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config(format!("cannot start {threads} worker threads: {e}")))?;

    let start = Instant::now();
    let params = req.config.parameters.clone();
    let out = pool.install(|| execute(req.experiment, params, seed))?;
    let outputs = output::write_data(&prefix, name, seed, &out)?;

    let mut echo = req.config.clone();
    echo.experiment = Some(name.to_string());
    echo.seed = Some(seed);
    echo.output = Some(prefix.display().to_string());
    echo.parameters = match out.parameters {
        serde_json::Value::Object(m) => m,
        _ => echo.parameters,
    };
    let manifest = RunManifest {
        schema_version: output::SCHEMA_VERSION,
        tool: "swlab",
        tool_version: env!("CARGO_PKG_VERSION"),
        experiment: name.to_string(),
        seed,
        config: serde_json::to_value(&echo).expect("config serializes"),
        threads,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        outputs,
    };
    output::write_manifest(&prefix, &manifest)?;
    Ok(manifest)
}
