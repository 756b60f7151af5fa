//! `latbench table4`: the full baseline comparison. Runs all fifteen
//! bundled setups on the three tuning trajectories, adds per-family means,
//! then runs each family's best setup on the high-speed track. Also emits
//! the six benchmark trajectory files with a manifest.

use std::fs;

use latbench_core::controllers::{run_closed_loop, PlantConfig};
use latbench_core::controllers::setups as core_setups;
use latbench_core::metrics::{metrics_report, MetricsReport};
use rayon::prelude::*;

use crate::commands::{write_json, Ctx, Timings};
use crate::error::Result;
use crate::formats::{self, SuiteManifest, SuiteTrajectory};
use crate::provenance::Provenance;
use crate::setups::TRAJECTORY_NAMES;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Also write the six benchmark trajectory CSVs and their manifest.
    #[arg(long)]
    pub with_suite: bool,
}

const FAMILIES: [&str; 5] = ["lqr", "mfc", "samfc", "pid", "nlmpc"];

struct Row {
    setup: &'static str,
    trajectory: &'static str,
    report: Option<MetricsReport>,
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<()> {
    ctx.prepare()?;
    let mut timings = Timings::start();

    let suite = latbench_core::trajectory::benchmark_suite();
    let provenance = Provenance::new(ctx.seed, &[b"table4", b"builtin-suite"]);
    let plant = PlantConfig::default();
    timings.mark("load");

    // every (setup, tuning trajectory) pair, evaluation-order independent
    let setups = core_setups::all();
    let jobs: Vec<(usize, usize)> =
        (0..setups.len()).flat_map(|s| (0..3).map(move |t| (s, t))).collect();
    let rows: Vec<Row> = jobs
        .par_iter()
        .map(|&(s, t)| {
            let (name, config) = &setups[s];
            let report = run_closed_loop(&suite[t], config, &plant, ctx.seed)
                .ok()
                .and_then(|log| metrics_report(&log));
            Row { setup: name, trajectory: TRAJECTORY_NAMES[t], report }
        })
        .collect();
    timings.mark("baseline");

    write_table(&rows, &provenance, ctx)?;

    // family champions by mean IAE over the tuning trajectories, re-run on
    // the long high-speed track
    let champions: Vec<&'static str> = FAMILIES
        .iter()
        .filter_map(|family| {
            rows.iter()
                .filter(|r| core_setups::family(r.setup) == *family)
                .filter_map(|r| r.report.as_ref().map(|rep| (r.setup, rep)))
                .filter(|(_, rep)| !rep.diverged)
                .fold(std::collections::BTreeMap::<&str, (f64, u32)>::new(), |mut acc, (s, rep)| {
                    let e = acc.entry(s).or_insert((0.0, 0));
                    e.0 += rep.iae;
                    e.1 += 1;
                    acc
                })
                .into_iter()
                .filter(|(_, (_, n))| *n == 3)
                .min_by(|a, b| {
                    let ma = a.1 .0 / a.1 .1 as f64;
                    let mb = b.1 .0 / b.1 .1 as f64;
                    ma.partial_cmp(&mb).unwrap().then(a.0.cmp(b.0))
                })
                .map(|(s, _)| s)
        })
        .collect();
    let t4_rows: Vec<Row> = champions
        .par_iter()
        .map(|name| {
            let config = core_setups::by_name(name).unwrap();
            let report = run_closed_loop(&suite[3], &config, &plant, ctx.seed)
                .ok()
                .and_then(|log| metrics_report(&log));
            Row { setup: name, trajectory: "t4", report }
        })
        .collect();
    write_rows_csv(&t4_rows, &provenance, ctx, "table4_t4.csv")?;
    timings.mark("highspeed");

    if args.with_suite {
        let mut manifest = SuiteManifest { provenance: provenance.clone(), trajectories: Vec::new() };
        for (name, trajectory) in TRAJECTORY_NAMES.iter().zip(&suite) {
            let file = format!("{name}.csv");
            formats::write_trajectory_csv(trajectory, &provenance, &ctx.path(&file))?;
            manifest.trajectories.push(SuiteTrajectory {
                name: name.to_string(),
                file,
                purpose: trajectory.purpose.clone(),
                length_m: trajectory.length(),
                v_max_kmh: trajectory.limits.v_max_kmh,
                a_x_max: trajectory.limits.a_x_max,
                a_x_min: trajectory.limits.a_x_min,
                a_y_max: trajectory.limits.a_y_max,
            });
        }
        write_json(&ctx.path("suite_manifest.json"), &manifest)?;
        timings.mark("suite");
    }
    timings.write(&ctx.path("timings.json"))?;

    println!(
        "table4: {} baseline rows, champions on t4: {}",
        rows.len(),
        champions.join(", ")
    );
    Ok(())
}

fn metric_cells(report: &Option<MetricsReport>) -> String {
    match report {
        Some(r) if !r.diverged => format!(
            "ok,{:.6},{:.6},{},{}",
            r.iae,
            r.mle,
            r.m_epsilon.map_or(String::new(), |v| format!("{v:.6}")),
            r.m_zeta.map_or(String::new(), |v| format!("{v:.6}")),
        ),
        _ => "diverged,,,,".to_string(),
    }
}

fn write_rows_csv(rows: &[Row], provenance: &Provenance, ctx: &Ctx, file: &str) -> Result<()> {
    let mut out = String::new();
    out.push_str(&provenance.csv_comment());
    out.push_str("setup,trajectory,status,iae,mle,m_epsilon,m_zeta\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            row.setup,
            row.trajectory,
            metric_cells(&row.report)
        ));
    }
    fs::write(ctx.path(file), out)?;
    Ok(())
}

/// Baseline table: one row per (setup, trajectory) in setup order, then a
/// mean row per family over its nine convergent runs.
fn write_table(rows: &[Row], provenance: &Provenance, ctx: &Ctx) -> Result<()> {
    let mut out = String::new();
    out.push_str(&provenance.csv_comment());
    out.push_str("setup,trajectory,status,iae,mle,m_epsilon,m_zeta\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            row.setup,
            row.trajectory,
            metric_cells(&row.report)
        ));
    }
    for family in FAMILIES {
        let reports: Vec<&MetricsReport> = rows
            .iter()
            .filter(|r| core_setups::family(r.setup) == family)
            .filter_map(|r| r.report.as_ref())
            .filter(|r| !r.diverged)
            .collect();
        if reports.is_empty() {
            out.push_str(&format!("{family}-mean,all,diverged,,,,\n"));
            continue;
        }
        let n = reports.len() as f64;
        let mean = |f: &dyn Fn(&MetricsReport) -> f64| reports.iter().map(|r| f(r)).sum::<f64>() / n;
        out.push_str(&format!(
            "{family}-mean,all,ok,{:.6},{:.6},{:.6},{:.6}\n",
            mean(&|r| r.iae),
            mean(&|r| r.mle),
            mean(&|r| r.m_epsilon.unwrap_or(0.0)),
            mean(&|r| r.m_zeta.unwrap_or(0.0)),
        ));
    }
    fs::write(ctx.path("table4.csv"), out)?;
    Ok(())
}
