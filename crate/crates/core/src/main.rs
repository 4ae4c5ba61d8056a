use clap::{Parser, Subcommand};
use kinetic_hybrid::harness::output::read_report;
use kinetic_hybrid::harness::{run_scenario, ScenarioConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "kinhybrid", about = "Hybrid Euler / ES-BGK / Boltzmann solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one of the preset scenarios.
    Run {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
        scenario: u8,
        /// TOML file whose keys override the preset.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// Also snapshot every K steps.
        #[arg(long)]
        snapshot_every: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the report of a finished run.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match exec(Cli::parse().cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn exec(cmd: Cmd) -> kinetic_hybrid::Result<()> {
    match cmd {
        Cmd::Run { scenario, config, workers, snapshot_every, out } => {
            let mut cfg = ScenarioConfig::load(scenario, config.as_deref())?;
            if workers.is_some() {
                cfg.workers = workers;
            }
            if snapshot_every.is_some() {
                cfg.snapshot_every = snapshot_every;
            }
            if let Some(dir) = out {
                cfg.out_dir = dir.to_string_lossy().into_owned();
            }
            cfg.validate()?;
            log::info!("scenario {scenario}: {} steps of dt = {:e}, output in {}", cfg.steps(), cfg.dt(), cfg.out_dir);
            let report = run_scenario(&cfg, Some(cfg.out_dir.as_ref()))?;
            println!("{}", report.summary());
        }
        Cmd::Report { out } => println!("{}", read_report(&out)?.summary()),
    }
    Ok(())
}
