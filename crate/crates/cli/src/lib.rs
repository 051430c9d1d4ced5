//! Scenario files, figure presets and batch runs on top of `qllg-core`.

pub mod config;
pub mod error;
pub mod plot;
pub mod preset;
pub mod runner;

use std::path::{Path, PathBuf};

pub use config::ScenarioConfig;
pub use error::CliError;
pub use preset::{figure_preset, PRESETS};
pub use runner::{run_scenario, RunOutput};

/// Run a scenario and write its files below `out_dir`.
pub fn run_and_write(config: &ScenarioConfig, base_dir: &Path, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let outputs = run_scenario(config, base_dir)?;
    runner::write_outputs(config, &outputs, out_dir)
}
