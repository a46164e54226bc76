//! Library side of the `pqbbh` command-line tool: configuration, the four
//! commands, and exit-code mapping.

pub mod commands;
pub mod config;

use anyhow::Context;

pub use commands::{render, Artifact};
pub use config::{Command, ConfigError, RunConfig, Settings};

/// Exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;

/// Resolves `flags` (plus any `--config` file) into a validated configuration.
pub fn configure(command: Command, flags: Settings) -> anyhow::Result<RunConfig> {
    let settings = Settings::load(flags)?;
    Ok(RunConfig::resolve(command, settings)?)
}

/// Renders the command on a pool with the configured thread count.
pub fn render_with_threads(config: &RunConfig) -> anyhow::Result<Artifact> {
    match config.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .context("building thread pool")?
            .install(|| render(config)),
        None => render(config),
    }
}

/// Configures, renders and writes; returns the artifact for reporting.
pub fn execute(command: Command, flags: Settings) -> anyhow::Result<Artifact> {
    let config = configure(command, flags)?;
    let artifact = render_with_threads(&config)?;
    commands::write(&config, &artifact)?;
    Ok(artifact)
}

/// Maps an error to its exit code by the first recognizable cause.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return EXIT_CONFIG;
        }
        if cause.is::<std::io::Error>() || cause.is::<csv::Error>() {
            return EXIT_IO;
        }
        if let Some(e) = cause.downcast_ref::<pqbbh::Error>() {
            return match e {
                pqbbh::Error::InvalidParams(_)
                | pqbbh::Error::Domain(_)
                | pqbbh::Error::DegenerateSpec(_) => EXIT_CONFIG,
                _ => EXIT_VIOLATION,
            };
        }
    }
    EXIT_VIOLATION
}
