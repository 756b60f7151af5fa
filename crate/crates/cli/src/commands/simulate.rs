//! `latbench simulate`: one closed-loop run, logged tick by tick.

use std::fs;

use latbench_core::controllers::{run_closed_loop_from, PlantConfig, SimLog, StartPose};
use latbench_core::metrics::metrics_report;
use latbench_core::vehicle::{TireModel, VehicleParams};

use crate::commands::{write_json, Ctx, Timings};
use crate::error::{CliError, Result};
use crate::formats::{self, MetricsFile};
use crate::provenance::Provenance;
use crate::setups;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Builtin trajectory name (t1..t6) or trajectory CSV path.
    pub trajectory: String,
    /// Bundled setup name (e.g. nlmpc-1) or controller JSON path.
    pub controller: String,
    /// Vehicle parameter TOML; omitted keys keep nominal values.
    #[arg(long)]
    pub vehicle: Option<String>,
    /// Lateral tire force model.
    #[arg(long, value_enum, default_value_t = TireArg::Linear)]
    pub tire: TireArg,
    /// Initial lateral offset from the path, m.
    #[arg(long, default_value_t = 0.0)]
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TireArg {
    Linear,
    Magic,
}

impl TireArg {
    fn model(self) -> TireModel {
        match self {
            TireArg::Linear => TireModel::Linear,
            TireArg::Magic => TireModel::MagicFormula,
        }
    }

    fn label(self) -> &'static str {
        match self {
            TireArg::Linear => "linear",
            TireArg::Magic => "magic",
        }
    }
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<()> {
    ctx.prepare()?;
    let mut timings = Timings::start();

    let trajectory = setups::load_trajectory(&args.trajectory)?;
    let controller = setups::load_controller(&args.controller)?;
    let vehicle_text = match &args.vehicle {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("vehicle file {path}: {e}")))?,
        None => String::new(),
    };
    let params = if vehicle_text.is_empty() {
        VehicleParams::default()
    } else {
        formats::parse_vehicle_toml(&vehicle_text)?
    };
    let plant = PlantConfig { params, tire: args.tire.model() };

    let provenance = Provenance::new(
        ctx.seed,
        &[
            args.trajectory.as_bytes(),
            formats::controller_to_json(&controller).as_bytes(),
            vehicle_text.as_bytes(),
            args.tire.label().as_bytes(),
            format!("{}", args.offset).as_bytes(),
        ],
    );
    timings.mark("load");

    let start = StartPose { lateral_offset: args.offset, speed: None };
    let log = run_closed_loop_from(&trajectory, &controller, &plant, ctx.seed, start)
        .map_err(|e| CliError::runtime(format!("simulation failed: {e:?}")))?;
    timings.mark("simulate");

    write_log_csv(&log, &provenance, ctx)?;
    let report = metrics_report(&log)
        .ok_or_else(|| CliError::runtime("run too short for a metrics report"))?;
    write_json(&ctx.path("metrics.json"), &MetricsFile::new(&report, provenance))?;
    timings.mark("write");
    timings.write(&ctx.path("timings.json"))?;

    if report.diverged {
        eprintln!("warning: run diverged; metrics cover the ticks before divergence");
    }
    println!(
        "simulate: {} on {} -> iae={:.4} mle={:.4} diverged={}",
        args.controller,
        trajectory.purpose,
        report.iae,
        report.mle,
        report.diverged
    );
    Ok(())
}

fn write_log_csv(log: &SimLog, provenance: &Provenance, ctx: &Ctx) -> Result<()> {
    let mut out = String::new();
    out.push_str(&provenance.csv_comment());
    out.push_str("t,s,y1,e_psi,vx,kappa_preview,u_ff,u_fb,delta_t,e_y\n");
    for tick in &log.ticks {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            tick.t,
            tick.s,
            tick.y1,
            tick.e_psi,
            tick.vx,
            tick.kappa_preview,
            tick.u_ff,
            tick.u_fb,
            tick.delta_t,
            tick.e_y
        ));
    }
    fs::write(ctx.path("log.csv"), out)?;
    Ok(())
}
