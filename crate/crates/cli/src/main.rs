use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use polyent::catalog;
use polyent::pl_dynamics::{lap_number, phi};
use polyent_cli::acceptance::{run_suite_with, SuiteOptions, REFERENCE_SEED, SUITE_CATALOG};
use polyent_cli::report::write_file;
use polyent_cli::{run_experiment, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "polyent", version, about = "Polynomial entropy experiments on PL graph maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a test suite.
    Check {
        #[arg(long, value_parser = ["acceptance"])]
        suite: String,
        /// Criterion ids to run, comma-separated.
        #[arg(long, value_delimiter = ',')]
        filter: Option<Vec<u32>>,
        #[arg(long, default_value_t = REFERENCE_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
        /// Base systems available to the suite, comma-separated.
        #[arg(long, value_delimiter = ',')]
        catalog: Option<Vec<String>>,
        /// Directory for the suite counts CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lap number of the n-th iterate of an interval map.
    Lap {
        #[arg(long)]
        map: String,
        #[arg(long)]
        n: usize,
    },
    /// Largest number of preimage components of a point under the n-th iterate.
    Phi {
        #[arg(long)]
        map: String,
        #[arg(long)]
        n: usize,
    },
}

fn execute(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Run { config, out, seed } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let out = out
                .or_else(|| cfg.out.clone())
                .ok_or_else(|| CliError::Config("no output directory (--out or `out`)".into()))?;
            let report = run_experiment(&cfg, &out)?;
            for s in &report.systems {
                let exp = s.growth.as_ref().map(|g| format!(" exponent {:.3}", g.exponent)).unwrap_or_default();
                println!("{}{exp} satisfied={}", s.name, s.satisfied);
            }
            if !report.all_satisfied {
                return Err(CliError::CheckFailed(format!("see {}", out.join("report.toml").display())));
            }
            Ok(())
        }
        Command::Check { suite: _, filter, seed, tolerance_scale, catalog, out } => {
            if !(tolerance_scale >= 0.0) {
                return Err(CliError::Config("tolerance scale must be nonnegative".into()));
            }
            let catalog = catalog.unwrap_or_else(|| SUITE_CATALOG.iter().map(|s| s.to_string()).collect());
            if let Some(bad) = catalog.iter().find(|c| !SUITE_CATALOG.contains(&c.as_str())) {
                return Err(CliError::Config(format!("{bad} is not a suite catalog system")));
            }
            let opts = SuiteOptions { seed, filter, tolerance_scale, catalog };
            let report = run_suite_with(&opts, |r| println!("{r}"));
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)
                    .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
                write_file(&dir.join("acceptance.csv"), &report.csv)?;
            }
            if !report.passed() {
                return Err(CliError::CheckFailed("acceptance criteria failed".into()));
            }
            Ok(())
        }
        Command::Lap { map, n } => {
            let f = catalog::resolve_map(&map)?;
            println!("{}", lap_number(&f, n)?);
            Ok(())
        }
        Command::Phi { map, n } => {
            let f = catalog::resolve_map(&map)?;
            println!("{}", phi(&f, n)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("polyent: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
