use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dbtrain::SimConfig;
use dbtrain_cli::suite::{builtin_names, parse_seeds};
use dbtrain_cli::{parse_config, run_suite, summarize_file, summarize_rows, CliError, ExpandOptions, ExperimentSuite, RunOptions};

/// Link-level simulator for dedicated mmWave beam training.
#[derive(Parser)]
#[command(name = "simulate", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a suite and write one CSV row per configuration and seed.
    Run {
        /// Suite file, or the name of a builtin suite.
        #[arg(long)]
        suite: String,
        /// Worker threads (default: one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Output CSV (default: the suite's `out`, else <suite>.csv).
        #[arg(long)]
        out: Option<PathBuf>,
        /// 32-element arrays, 128-bin grids and 10^6 symbols.
        #[arg(long)]
        paper_scale: bool,
        /// Seeds to run instead of the suite's, e.g. 1,2,5-8.
        #[arg(long)]
        seed_list: Option<String>,
        /// Config overrides applied to every row.
        #[arg(value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Aggregate a results CSV and evaluate the checks of its suites.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
        /// Suite file whose checks apply (builtin suites are found by name).
        #[arg(long)]
        suite: Option<String>,
    },
    /// Print the configuration that results from a config file and overrides.
    Config {
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// List the builtin suites.
    Suites,
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Run { suite, jobs, out, paper_scale, seed_list, overrides } => {
            let suite = ExperimentSuite::load(&suite)?;
            let seeds = seed_list.as_deref().map(parse_seeds).transpose()?;
            let opts = RunOptions { jobs, out, expand: ExpandOptions { paper_scale, seeds, overrides } };
            let outcome = run_suite(&suite, &opts)?;
            let report = summarize_rows(&outcome.rows, std::slice::from_ref(&suite));
            print!("{}", report.render());
            println!("wrote {} rows to {} in {:.1} s", outcome.rows.len(), outcome.out_path.display(), outcome.wall_s);
            let failed = outcome.failed_rows();
            if failed > 0 {
                eprintln!("error: {failed} rows failed, see the error column");
                return Ok(1);
            }
            Ok(0)
        }
        Command::Summarize { input, suite } => {
            let defs = suite.as_deref().map(ExperimentSuite::load).transpose()?;
            let report = summarize_file(&input, defs.as_slice())?;
            print!("{}", report.render());
            Ok(report.exit_code() as u8)
        }
        Command::Config { file, overrides } => {
            let cfg = parse_config(file.as_deref(), &overrides)?;
            for key in SimConfig::KEYS {
                println!("{key} = {}", cfg.get(key).expect("listed keys exist"));
            }
            Ok(0)
        }
        Command::Suites => {
            for name in builtin_names() {
                println!("{name}");
            }
            Ok(0)
        }
    }
}
