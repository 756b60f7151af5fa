//! `latbench robustness`: Monte Carlo plant-scatter screen over an archive.
//! Each surviving setup is simulated against random plants; the success
//! percentage is written back into the archive's robustness column.

use latbench_core::controllers::DIVERGENCE_LIMIT;
use latbench_core::tuning::{
    monte_carlo_draw, workzone_filter, ArchiveEntry, Family, ParetoArchive,
    RobustnessDistributions,
};
use rayon::prelude::*;

use crate::commands::{write_json, Ctx, Timings};
use crate::error::{CliError, Result};
use crate::formats::{read_archive_csv, write_archive_csv};
use crate::provenance::Provenance;
use crate::setups;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Archive CSV from a tuning campaign.
    pub archive: String,
    /// Controller family the archive belongs to.
    #[arg(long)]
    pub family: String,
    /// Screening trajectory (builtin name or CSV path).
    #[arg(long, default_value = "t5")]
    pub trajectory: String,
    /// Monte Carlo draws per setup.
    #[arg(long, default_value_t = 200)]
    pub draws: usize,
    /// Success threshold on the peak lateral error, m.
    #[arg(long, default_value_t = DIVERGENCE_LIMIT)]
    pub threshold: f64,
    /// Skip setups outside the work-zone limits instead of screening them.
    #[arg(long)]
    pub workzone_only: bool,
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<()> {
    ctx.prepare()?;
    let mut timings = Timings::start();

    let family = Family::from_name(&args.family)
        .ok_or_else(|| CliError::config(format!("unknown family \"{}\"", args.family)))?;
    let dim = family.space().dim();
    let archive = read_archive_csv(std::path::Path::new(&args.archive), dim)?;
    let screened = if args.workzone_only { workzone_filter(&archive) } else { archive };
    if screened.is_empty() {
        return Err(CliError::config("archive holds no setups to screen"));
    }
    let trajectory = setups::load_trajectory(&args.trajectory)?;
    if args.draws == 0 {
        return Err(CliError::config("draws must be positive"));
    }
    let dists = RobustnessDistributions::default();
    let provenance = Provenance::new(
        ctx.seed,
        &[
            args.family.as_bytes(),
            args.trajectory.as_bytes(),
            format!("draws={} threshold={}", args.draws, args.threshold).as_bytes(),
        ],
    );
    timings.mark("load");

    // draws are independent per (seed, draw), so the flattened job list can
    // run in any order without changing a single percentage
    let entries: Vec<ArchiveEntry> = screened
        .entries()
        .par_iter()
        .map(|entry| {
            let mut out = entry.clone();
            out.robustness_pct = family.config(&entry.params).ok().map(|config| {
                let successes = (0..args.draws)
                    .into_par_iter()
                    .filter(|draw| {
                        monte_carlo_draw(
                            &config,
                            &trajectory,
                            ctx.seed,
                            *draw as u64,
                            &dists,
                            args.threshold,
                        )
                    })
                    .count();
                100.0 * successes as f64 / args.draws as f64
            });
            out
        })
        .collect();
    let mut annotated = ParetoArchive::new();
    for e in entries {
        annotated.insert(e);
    }
    timings.mark("screen");

    let names: Vec<&str> = family.space().specs.iter().map(|s| s.name).collect();
    write_archive_csv(&annotated, &names, &provenance, &ctx.path("archive_robust.csv"))?;
    write_json(
        &ctx.path("robustness_summary.json"),
        &serde_json::json!({
            "provenance": provenance,
            "family": family.name(),
            "draws": args.draws,
            "threshold": args.threshold,
            "screened": annotated.len(),
        }),
    )?;
    timings.mark("write");
    timings.write(&ctx.path("timings.json"))?;

    println!(
        "robustness: {} setups screened with {} draws each",
        annotated.len(),
        args.draws
    );
    Ok(())
}
