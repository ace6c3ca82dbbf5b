//! Command-line front end for power-beacon deployment planning.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "wetplan",
    version,
    about = "Plan RF power-beacon deployments: placement, fleet sizing, coverage and outage studies"
)]
struct Cli {
    /// JSON configuration file; omitted keys take the standard defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// RNG seed; required for stochastic runs.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (overrides the config key).
    #[arg(long, global = true)]
    out_dir: Option<String>,

    /// Monte Carlo sample count (overrides the config key).
    #[arg(long, global = true)]
    samples: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize beacon positions for a fixed beacon count.
    Optimize {
        /// Number of beacons to place.
        #[arg(long)]
        beacons: Option<usize>,
        /// Solver: ode-pobes, ipm, pso or centered-benchmark.
        #[arg(long)]
        solver: Option<String>,
        /// Also write the mean-power heatmap CSV.
        #[arg(long)]
        heatmap: bool,
    },
    /// Run every solver over a range of beacon counts.
    Compare {
        #[arg(long)]
        beacon_min: Option<usize>,
        #[arg(long)]
        beacon_max: Option<usize>,
    },
    /// Minimum beacon count meeting the outage constraint, per (zeta, R).
    MinBeacons {
        /// Solver used for the per-count placements.
        #[arg(long)]
        solver: Option<String>,
        /// Largest beacon count to try.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Maximum coverage radius per beacon count.
    Coverage {},
    /// Outage matrix over beacon and antenna counts.
    Antennas {},
    /// Export the evaluation grid as CSV.
    GridExport {},
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    if let Some(dir) = cli.out_dir {
        config.out_dir = dir;
    }
    if let Some(samples) = cli.samples {
        config.samples = samples;
    }

    match cli.command {
        Command::Optimize {
            beacons,
            solver,
            heatmap,
        } => {
            if let Some(b) = beacons {
                config.beacons = b;
            }
            if let Some(s) = solver {
                config.solver = s;
            }
            config.heatmap |= heatmap;
            config.validate()?;
            commands::cmd_optimize(&config)
        }
        Command::Compare {
            beacon_min,
            beacon_max,
        } => {
            if let Some(b) = beacon_min {
                config.beacon_range_min = b;
            }
            if let Some(b) = beacon_max {
                config.beacon_range_max = b;
            }
            config.validate()?;
            commands::cmd_compare(&config)
        }
        Command::MinBeacons { solver, cap } => {
            if let Some(s) = solver {
                config.solver = s;
            }
            if let Some(c) = cap {
                config.min_beacons_cap = c;
            }
            config.validate()?;
            commands::cmd_min_beacons(&config)
        }
        Command::Coverage {} => {
            config.validate()?;
            commands::cmd_coverage(&config)
        }
        Command::Antennas {} => {
            config.validate()?;
            commands::cmd_antennas(&config)
        }
        Command::GridExport {} => {
            config.validate()?;
            commands::cmd_grid_export(&config)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("completed with failures; see the output tables");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
