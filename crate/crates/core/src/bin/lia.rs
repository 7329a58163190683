use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lia_core::config::{ConfigError, Experiment, ExperimentConfig};
use lia_core::experiment::{run_experiment, ExperimentError};

const EXIT_VALIDATION: u8 = 2;
const EXIT_SOLVER: u8 = 3;

/// Self-similar vortex filament experiments.
#[derive(Debug, Parser)]
#[command(name = "lia", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment; `--key value` pairs override the file.
    ///
    /// Artifacts go to `--out DIR`, else `$LIA_OUT_DIR/<experiment>`, else `./out/<experiment>`.
    Run {
        config: PathBuf,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
        overrides: Vec<String>,
    },
    /// List the canonical experiments.
    ListExperiments,
    /// Parse and validate a configuration, printing the filled-in result.
    Validate {
        config: PathBuf,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
        overrides: Vec<String>,
    },
}

fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let Some(key) = arg.strip_prefix("--") else {
            return Err(ConfigError::Validation { key: arg.clone(), message: "overrides take the form --key value".into() });
        };
        if let Some((k, v)) = key.split_once('=') {
            out.push((k.to_string(), v.to_string()));
        } else {
            let value = it
                .next()
                .ok_or_else(|| ConfigError::Validation { key: key.to_string(), message: "missing value".into() })?;
            out.push((key.to_string(), value.clone()));
        }
    }
    Ok(out)
}

fn load(path: &PathBuf, overrides: &[String]) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Validation {
        key: path.display().to_string(),
        message: format!("cannot read: {e}"),
    })?;
    ExperimentConfig::parse_with_overrides(&text, &parse_overrides(overrides)?)
}

fn output_dir(cfg: &ExperimentConfig) -> PathBuf {
    if let Some(out) = &cfg.out {
        return out.clone();
    }
    let root = std::env::var_os("LIA_OUT_DIR").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"));
    root.join(cfg.experiment.name())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::ListExperiments => {
            for e in Experiment::ALL {
                println!("{:<26} {}", e.name(), e.summary());
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config, overrides } => match load(&config, &overrides) {
            Ok(cfg) => {
                print!("{}", cfg.to_text());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_VALIDATION)
            }
        },
        Command::Run { config, overrides } => {
            let cfg = match load(&config, &overrides) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_VALIDATION);
                }
            };
            let dir = output_dir(&cfg);
            match run_experiment(&cfg, &dir) {
                Ok(out) => {
                    for (stage, report) in &out.reports {
                        let label = if stage.is_empty() { cfg.experiment.name() } else { stage.as_str() };
                        println!("{label}: {} steps, final t = {:e}", report.steps, report.final_t);
                        for p in &report.probes {
                            println!("  t = {:.6e}  c(0) = {:.9}  max |c - c0/sqrt(t)| = {:.3e}", p.t, p.c_origin, p.error.max_abs);
                        }
                    }
                    println!("wrote {} files to {}", out.files.len(), dir.display());
                    ExitCode::SUCCESS
                }
                Err(ExperimentError::Config(e)) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_VALIDATION)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_SOLVER)
                }
            }
        }
    }
}
