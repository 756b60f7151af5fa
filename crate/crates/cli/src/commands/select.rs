//! `latbench select`: pick the accurate / balanced / smooth setups from a
//! robustness-annotated archive and write each as a runnable controller
//! file.

use latbench_core::tuning::{select_setups, ArchiveEntry, Family, TuningError};

use crate::commands::{write_json, Ctx, Timings};
use crate::error::{CliError, Result};
use crate::formats::{controller_to_json, read_archive_csv};
use crate::provenance::Provenance;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Robustness-annotated archive CSV.
    pub archive: String,
    /// Controller family the archive belongs to.
    #[arg(long)]
    pub family: String,
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<()> {
    ctx.prepare()?;
    let mut timings = Timings::start();

    let family = Family::from_name(&args.family)
        .ok_or_else(|| CliError::config(format!("unknown family \"{}\"", args.family)))?;
    let archive = read_archive_csv(std::path::Path::new(&args.archive), family.space().dim())?;
    let selection = select_setups(&archive).map_err(|e| match e {
        TuningError::TooFewPoints => CliError::runtime(
            "fewer than two setups pass the work-zone and robustness gates",
        ),
        other => CliError::runtime(format!("selection failed: {other:?}")),
    })?;
    let provenance = Provenance::new(ctx.seed, &[args.family.as_bytes()]);
    timings.mark("select");

    let mut summary = serde_json::Map::new();
    summary.insert("provenance".into(), serde_json::to_value(&provenance).unwrap());
    summary.insert("family".into(), family.name().into());
    for (label, entry) in [
        ("accurate", &selection.accurate),
        ("balanced", &selection.balanced),
        ("smooth", &selection.smooth),
    ] {
        let config = family
            .config(&entry.params)
            .map_err(|e| CliError::runtime(format!("selected setup invalid: {e:?}")))?;
        std::fs::write(ctx.path(&format!("{label}.json")), controller_to_json(&config))?;
        summary.insert(label.into(), entry_value(entry));
    }
    write_json(&ctx.path("selection.json"), &serde_json::Value::Object(summary))?;
    timings.mark("write");
    timings.write(&ctx.path("timings.json"))?;

    println!(
        "select: accurate #{} balanced #{} smooth #{}",
        selection.accurate.index, selection.balanced.index, selection.smooth.index
    );
    Ok(())
}

fn entry_value(entry: &ArchiveEntry) -> serde_json::Value {
    serde_json::json!({
        "index": entry.index,
        "params": entry.params,
        "max_iae": entry.objectives.max_iae,
        "max_m_epsilon": entry.objectives.max_m_epsilon,
        "max_m_zeta": entry.objectives.max_m_zeta,
        "robustness_pct": entry.robustness_pct,
    })
}
