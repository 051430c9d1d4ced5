use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qllg_cli::{figure_preset, runner, CliError, ScenarioConfig};
use qllg_core::UnitSystem;

#[derive(Parser)]
#[command(name = "qllg", about = "Quantum and classical spin dynamics in batch")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Bohr magneton convention: `paper` or `codata` (overrides the file).
    #[arg(long, global = true)]
    units: Option<UnitSystem>,

    /// Override every run's horizon, ps.
    #[arg(long, global = true)]
    t_max: Option<f64>,

    /// Directory for CSV and SVG output.
    #[arg(long, global = true, env = "QLLG_OUTPUT_DIR", default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run { file: PathBuf },
    /// Print (default) or run a built-in scenario.
    Preset {
        name: String,
        #[arg(long, conflicts_with = "run")]
        dump: bool,
        #[arg(long)]
        run: bool,
    },
    /// Check a scenario file without integrating.
    Validate { file: PathBuf },
    /// Print the version.
    Version,
}

fn apply_overrides(cli: &Cli, config: &mut ScenarioConfig) -> Result<(), CliError> {
    if let Some(units) = cli.units {
        config.units = units;
    }
    if let Some(t) = cli.t_max {
        config.set_t_max(t);
    }
    config.check()
}

fn execute(config: &ScenarioConfig, base_dir: &Path, out_dir: &Path) -> Result<(), CliError> {
    for path in qllg_cli::run_and_write(config, base_dir, out_dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn base_dir_of(file: &Path) -> PathBuf {
    file.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Version => {
            println!("qllg {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
        Command::Run { file } => {
            let mut config = ScenarioConfig::load(file)?;
            apply_overrides(cli, &mut config)?;
            execute(&config, &base_dir_of(file), &cli.output_dir)
        }
        Command::Validate { file } => {
            let mut config = ScenarioConfig::load(file)?;
            apply_overrides(cli, &mut config)?;
            let runs = runner::prepare(&config, &base_dir_of(file))?;
            println!("{}: ok ({} runs)", file.display(), runs.len());
            Ok(())
        }
        Command::Preset { name, run, .. } => {
            let mut config = figure_preset(name)?;
            apply_overrides(cli, &mut config)?;
            if *run {
                execute(&config, Path::new("."), &cli.output_dir)
            } else {
                print!("{}", config.to_toml());
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
