use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use offshore_h2::lcoh::Scenario;
use offshore_h2_cli::{cmd_dispatch, cmd_lcoh, cmd_pipeline, cmd_trade, cmd_wake, ExportCache, RunConfig, RunError};

#[derive(Debug, Parser)]
#[command(name = "offshore-h2", version, about = "Offshore wind to hydrogen modelling chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (JSON).
    #[arg(long, global = true, default_value = "demo/demo.json")]
    config: PathBuf,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Scenario year: 2030, 2040 or 2050.
    #[arg(long, global = true)]
    year: Option<u16>,
    /// Learning scenario: high, median or low.
    #[arg(long, global = true)]
    scenario: Option<Scenario>,
    /// Hydrogen volume fraction cap in the gas network.
    #[arg(long, global = true)]
    blend_cap: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Wake-corrected capacity factors per grid cell.
    Wake,
    /// LCOH map and national supply curves.
    Lcoh,
    /// Coordinated power and gas dispatch over the representative days.
    Dispatch,
    /// International hydrogen trade and carbon ledger.
    Trade,
    /// Every stage in order.
    Pipeline,
}

fn run(cli: &Cli) -> Result<(), RunError> {
    let mut cfg = RunConfig::load(&cli.config)?;
    if let Some(out) = &cli.out {
        cfg.out.clone_from(out);
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(year) = cli.year {
        cfg.year = year;
    }
    if let Some(s) = cli.scenario {
        cfg.scenario = s;
    }
    if cli.blend_cap.is_some() {
        cfg.blend_cap = cli.blend_cap;
    }
    cfg.validate()?;
    match cli.command {
        Command::Wake => cmd_wake(&cfg).map(drop),
        Command::Lcoh => {
            let wake = cmd_wake(&cfg)?;
            cmd_lcoh(&cfg, &wake).map(drop)
        }
        Command::Dispatch => cmd_dispatch(&cfg).map(drop),
        Command::Trade => {
            let wake = cmd_wake(&cfg)?;
            cmd_trade(&cfg, &wake, &mut ExportCache::default()).map(drop)
        }
        Command::Pipeline => cmd_pipeline(&cfg).map(drop),
    }?;
    println!("outputs written to {}", cfg.out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
