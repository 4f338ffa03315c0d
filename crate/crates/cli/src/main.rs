//! Experiment harness for pulse-driven perturbation studies.
//!
//! Subcommands reproduce the reference figures and studies as CSV tables
//! (plus optional SVG line plots): `fig1`, `fig2`, `optimize`, `scaling`,
//! `sweep`. Exit codes: 0 success, 2 configuration error, 3 numeric
//! failure, 4 i/o failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;

#[derive(Parser)]
#[command(
    name = "pulsekam",
    version,
    about = "Pulse-driven perturbation studies: optimized iteration chains vs Dyson/Magnus"
)]
struct Cli {
    /// Key-value configuration file (see README for the format).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory (default: `out`, or the config's `out_dir`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Also emit SVG line plots next to the CSV tables.
    #[arg(long, global = true)]
    svg: bool,

    /// Override the number of scan grid points.
    #[arg(long, global = true, value_name = "N")]
    points: Option<usize>,

    /// Suppress the summary lines on stdout.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// First-iteration error and eigenvalue objective against t1.
    Fig1,
    /// Two-iteration error against t2 at fixed t1.
    Fig2,
    /// Grid scan plus golden-section refinement of the objective.
    Optimize,
    /// Error-versus-epsilon table with fitted slopes per method.
    Scaling,
    /// Generic parameter sweep of reference errors.
    Sweep,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = Cli::parse();

    let mut config = match &cli.config {
        Some(path) => match ExperimentConfig::from_file(path) {
            Ok(config) => config,
            Err(err) => {
                eprintln!("{err}");
                return 2;
            }
        },
        None => ExperimentConfig::default(),
    };
    if let Some(out) = cli.out {
        config.out_dir = out;
    }
    if cli.svg {
        config.svg = true;
    }
    if let Some(points) = cli.points {
        if points < 3 {
            eprintln!("config error: --points must be at least 3, got {points}");
            return 2;
        }
        config.scan_points = points;
    }
    config.quiet = cli.quiet;

    let result = match cli.command {
        Command::Fig1 => commands::cmd_fig1(&config),
        Command::Fig2 => commands::cmd_fig2(&config),
        Command::Optimize => commands::cmd_optimize(&config),
        Command::Scaling => commands::cmd_scaling(&config),
        Command::Sweep => commands::cmd_sweep(&config),
    };

    match result {
        Ok(paths) => {
            if !config.quiet {
                for path in paths {
                    println!("wrote {}", path.display());
                }
            }
            0
        }
        Err(err) => {
            eprintln!("{err}");
            err.exit_code()
        }
    }
}
