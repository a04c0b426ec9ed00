use std::path::PathBuf;

use clap::{Parser, Subcommand};
use inroute_core::{
    export_results, generate_instance, read_instance, run_experiment, write_instance,
    CoordinateSource, DemandPattern, ExperimentConfig, ExportFormat, GeneratorSpec,
};
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(
    name = "inroute",
    version,
    about = "Bi-objective inventory routing solver"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random instance file.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        k: u64,
        #[arg(long, value_parser = ["constant", "increasing", "sinusoid"])]
        pattern: String,
        #[arg(long)]
        seed: u64,
        /// Coordinate list, depot first, one "x y" pair per line.
        #[arg(long)]
        coords: Option<PathBuf>,
        /// Side of the square customers are scattered over when no coordinate file is given.
        #[arg(long, default_value_t = 100.0)]
        side: f64,
        /// Instance name; defaults to the output file stem.
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the policy alternatives of an instance and write results.csv and results.json.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        /// Improve routes with record-to-record travel.
        #[arg(long)]
        improve: bool,
        #[arg(long, default_value_t = 200)]
        random: usize,
        #[arg(long, default_value_t = 20)]
        controlled: usize,
        /// Comma-separated frequency ladder; defaults to the divisors of the horizon.
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve instances and experiments over HTTP.
    Serve {
        #[arg(long, env = "INROUTE_INSTANCE_DIR")]
        instance_dir: PathBuf,
        #[arg(long, env = "INROUTE_PORT")]
        port: u16,
        /// Experiments allowed to compute at the same time.
        #[arg(long, default_value_t = 2)]
        max_running: usize,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] inroute_core::Error),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Core(e) if e.is_input_error() => 2,
            CliError::Core(_) | CliError::Internal(_) => 3,
        }
    }
}

fn instance_name(name: Option<String>, out: &std::path::Path) -> Result<String, CliError> {
    let name = name.unwrap_or_else(|| {
        out.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let name: String = name
        .chars()
        .map(|c| if c.is_whitespace() { '_' } else { c })
        .collect();
    if name.is_empty() {
        return Err(CliError::Usage(
            "cannot derive an instance name; pass --name".into(),
        ));
    }
    Ok(name)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate {
            n,
            p,
            k,
            pattern,
            seed,
            coords,
            side,
            name,
            out,
        } => {
            let spec = GeneratorSpec {
                name: instance_name(name, &out)?,
                customers: n,
                periods: p,
                capacity: k,
                pattern: pattern.parse::<DemandPattern>()?,
                seed,
                coordinates: match coords {
                    Some(path) => CoordinateSource::File(path),
                    None => CoordinateSource::RandomSquare { side },
                },
            };
            let inst = generate_instance(&spec)?;
            std::fs::write(&out, write_instance(&inst)).map_err(|e| inroute_core::Error::Io {
                path: out.display().to_string(),
                source: e,
            })?;
            Ok(())
        }
        Command::Solve {
            instance,
            improve,
            random,
            controlled,
            ladder,
            seed,
            out,
        } => {
            let inst = read_instance(&instance)?;
            let config = ExperimentConfig {
                ladder,
                random_count: random,
                controlled_per_gap: controlled,
                improve_routing: improve,
                seed,
                ..ExperimentConfig::default()
            };
            let result = run_experiment(&inst, &config)?;
            std::fs::create_dir_all(&out).map_err(|e| inroute_core::Error::Io {
                path: out.display().to_string(),
                source: e,
            })?;
            export_results(&result, ExportFormat::Csv, &out.join("results.csv"))?;
            export_results(&result, ExportFormat::Json, &out.join("results.json"))?;
            eprintln!(
                "{}: {} alternatives, {} on the front, {:.2}s",
                result.instance,
                result.alternatives.len(),
                result.front.len(),
                result.duration_secs
            );
            Ok(())
        }
        Command::Serve {
            instance_dir,
            port,
            max_running,
        } => {
            if !instance_dir.is_dir() {
                return Err(CliError::Input(format!(
                    "instance directory {} does not exist",
                    instance_dir.display()
                )));
            }
            let runtime = tokio::runtime::Runtime::new()
                .map_err(|e| CliError::Internal(format!("cannot start runtime: {e}")))?;
            runtime
                .block_on(crate::service::serve(instance_dir, port, max_running))
                .map_err(|e| CliError::Internal(e.to_string()))
        }
    }
}
