//! Library side of the `frame-lab` binary: configuration, command
//! drivers and report emission.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::time::Instant;

use commands::CommandOutput;
use config::LoadedConfig;
use error::CliError;
use report::{ReportEnvelope, Timing, TOOL_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Density,
    Frames,
    Hull,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Density => "density",
            Command::Frames => "frames",
            Command::Hull => "hull",
        }
    }
}

/// Runs a command and wraps its payload; returns the envelope and the CSV
/// tables derived from it.
pub fn execute(
    command: Command,
    loaded: &LoadedConfig,
    timing: bool,
) -> Result<(ReportEnvelope, Vec<report::CsvTable>), CliError> {
    let start = Instant::now();
    let CommandOutput { payload, tables } = match command {
        Command::Density => commands::run_density(&loaded.config)?,
        Command::Frames => commands::run_frames(&loaded.config)?,
        Command::Hull => commands::run_hull(&loaded.config)?,
    };
    let envelope = ReportEnvelope {
        tool_version: TOOL_VERSION.into(),
        config_hash: loaded.hash.clone(),
        command: command.name().into(),
        timing: timing.then(|| Timing {
            wall_seconds: start.elapsed().as_secs_f64(),
        }),
        payload,
    };
    Ok((envelope, tables))
}
