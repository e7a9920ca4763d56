use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use simlab::experiments::{self, ExperimentName, ExperimentSpec};

#[derive(Parser)]
#[command(
    name = "simlab",
    version,
    about = "Run and verify similarity-search experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSV.
    Run {
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// File of key=value lines, overridden by --param.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
    },
    /// Check the invariants tied to an experiment.
    Verify {
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List experiments with their default parameters.
    List,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> simlab::Result<ExitCode> {
    match cmd {
        Command::Run {
            name,
            seed,
            out,
            config,
            params,
        } => {
            let name: ExperimentName = name.parse()?;
            let config = match config {
                Some(path) => experiments::parse_config(&std::fs::read_to_string(path)?)?,
                None => Vec::new(),
            };
            let flags = params
                .iter()
                .map(|s| experiments::parse_kv(s))
                .collect::<simlab::Result<Vec<_>>>()?;
            let spec = ExperimentSpec::new(name, seed, out, &config, &flags)?;
            let summary = experiments::run(&spec)?;
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            println!("{} rows", summary.rows);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { name, seed } => {
            let report = experiments::verify(name.parse()?, seed)?;
            for c in &report.checks {
                println!("{c}");
            }
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::List => {
            for e in ExperimentName::ALL {
                let defaults: Vec<String> = e
                    .defaults()
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect();
                println!("{:<24} {}", e.as_str(), e.description());
                println!("{:<24} {}", "", defaults.join(" "));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
