use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use latbench_cli::commands::{self, Ctx};
use latbench_cli::error::Result;

/// Lateral path-tracking benchmark runner.
#[derive(Debug, Parser)]
#[command(name = "latbench", version, about)]
struct Cli {
    /// Base seed for every randomized stage.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one setup on one trajectory and log the result.
    Simulate(commands::simulate::Args),
    /// Baseline comparison of all bundled setups.
    Table4(commands::table4::Args),
    /// Pareto tuning campaign from a campaign file.
    Tune(commands::tune::Args),
    /// Monte Carlo robustness screen over an archive.
    Robustness(commands::robustness::Args),
    /// Pick accurate/balanced/smooth setups from a screened archive.
    Select(commands::select::Args),
    /// Render an SVG figure from existing artifacts.
    Plot(commands::plot::Args),
}

fn dispatch(cli: &Cli) -> Result<()> {
    let ctx = Ctx { seed: cli.seed, out: cli.out.clone() };
    match &cli.command {
        Command::Simulate(args) => commands::simulate::run(&ctx, args),
        Command::Table4(args) => commands::table4::run(&ctx, args),
        Command::Tune(args) => commands::tune::run(&ctx, args),
        Command::Robustness(args) => commands::robustness::run(&ctx, args),
        Command::Select(args) => commands::select::run(&ctx, args),
        Command::Plot(args) => commands::plot::run(&ctx, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        // a failure here only means a pool already exists (tests), which is fine
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global();
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("latbench: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
