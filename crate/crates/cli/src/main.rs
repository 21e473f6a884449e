//! `wavefocus`: runs one experiment described by a TOML config.
//!
//! Exit codes: 0 ok, 2 configuration error, 3 infeasible configuration,
//! 4 numerical error. Failures print a JSON diagnostic on stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use wavefocus::io::{diagnostic, exit_code, run, ExperimentConfig, FieldFile, Mode, RunOptions};
use wavefocus::Error;

#[derive(Parser, Debug)]
#[command(name = "wavefocus", version, about = "Localized wave and Maxwell fields from boundary excitations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// Experiment config (TOML, schema_version = 1).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory for the report and field files.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Worker threads; all cores by default.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Random seed; overrides the config.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Require bitwise reproducible reductions.
    #[arg(long)]
    strict_reproducible: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the mode named in the config.
    Run(RunArgs),
    /// Forward solve with a pulse on Γ; writes snapshots.
    Simulate(RunArgs),
    /// Dot tests of every exact-mode operator.
    VerifyAdjoint(RunArgs),
    /// Travel times from Γ.
    DistanceMap(RunArgs),
    /// Large on the target window, small on `D × (0,T)`.
    LocalizeSpace(RunArgs),
    /// Silent before the target, case `d < a`.
    #[command(name = "localize-time-I", alias = "localize-time-i")]
    LocalizeTimeI(RunArgs),
    /// Small after the target, case `c > b`.
    #[command(name = "localize-time-II", alias = "localize-time-ii")]
    LocalizeTimeII(RunArgs),
    /// Parse and validate a config, printing it with defaults filled in.
    Validate {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
    },
    /// Print the header of a WFOC1 field file.
    Inspect { path: PathBuf },
}

fn execute(command: Command) -> Result<serde_json::Value, Error> {
    let (args, mode) = match command {
        Command::Validate { config } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            return serde_json::to_value(&cfg).map_err(|e| Error::Format(e.to_string()));
        }
        Command::Inspect { path } => {
            let f = FieldFile::read(&path)?;
            let max = f.data.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            return Ok(json!({ "dims": f.dims, "time_index": f.time_index, "values": f.data.len(), "max_abs": max }));
        }
        Command::Run(a) => (a, None),
        Command::Simulate(a) => (a, Some(Mode::Simulate)),
        Command::VerifyAdjoint(a) => (a, Some(Mode::VerifyAdjoint)),
        Command::DistanceMap(a) => (a, Some(Mode::DistanceMap)),
        Command::LocalizeSpace(a) => (a, Some(Mode::LocalizeSpace)),
        Command::LocalizeTimeI(a) => (a, Some(Mode::LocalizeTimeI)),
        Command::LocalizeTimeII(a) => (a, Some(Mode::LocalizeTimeII)),
    };
    let mut cfg = ExperimentConfig::from_path(&args.config)?;
    if let Some(mode) = mode {
        if mode != cfg.mode {
            log::info!("overriding config mode {:?} with {:?}", cfg.mode, mode);
            cfg = cfg.with_mode(mode)?;
        }
    }
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(Error::Config(vec!["`--threads`: must be positive".into()]));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(vec![format!("`--threads`: {e}")]))?;
    }
    let opts = RunOptions { out_dir: args.out, seed: args.seed, strict_reproducible: args.strict_reproducible };
    let outcome = run(&cfg, &opts)?;
    Ok(json!({
        "report": outcome.report_path,
        "mode": cfg.mode,
        "artifacts": outcome.report.artifacts.len() + 1,
    }))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", serde_json::to_string_pretty(&diagnostic(&err)).unwrap_or_else(|_| err.to_string()));
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
