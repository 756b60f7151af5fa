//! `latbench tune`: a Pareto tuning campaign driven by a campaign JSON
//! file. Candidate evaluations are cached in a checkpoint file keyed by the
//! exact parameter vector, so an interrupted or shorter campaign can be
//! resumed: the search replays deterministically and only the tail of the
//! candidate sequence is re-simulated.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use latbench_core::controllers::PlantConfig;
use latbench_core::trajectory::Trajectory;
use latbench_core::tuning::{
    direct_multisearch_batched, evaluate_candidate, Family, ObjectiveVector, ParameterSpace,
    ParameterSpec,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::commands::{write_json, Ctx, Timings};
use crate::error::{CliError, Result};
use crate::formats::write_archive_csv;
use crate::provenance::Provenance;
use crate::setups;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Campaign description JSON.
    pub campaign: String,
}

/// Campaign document: controller family, evaluation budget and the tuning
/// trajectories (builtin names or CSV paths). `space` optionally overrides
/// the family's default parameter bounds; `seed` overrides the global one.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignFile {
    pub family: String,
    pub budget: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    pub trajectories: Vec<String>,
    #[serde(default)]
    pub space: Option<Vec<SpaceBound>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceBound {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

// Checkpoint entries store exact bit patterns: cache hits must reproduce
// the original evaluation to the last bit, and the objectives can carry the
// infinite divergence sentinel that JSON numbers cannot.
#[derive(Debug, Serialize, Deserialize)]
struct CheckpointEntry {
    param_bits: Vec<u64>,
    objective_bits: [u64; 3],
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct Checkpoint {
    entries: Vec<CheckpointEntry>,
}

type Cache = HashMap<Vec<u64>, ObjectiveVector>;

fn key(params: &[f64]) -> Vec<u64> {
    params.iter().map(|p| p.to_bits()).collect()
}

fn load_cache(path: &Path) -> Result<Cache> {
    if !path.exists() {
        return Ok(Cache::new());
    }
    let text = fs::read_to_string(path)?;
    let file: Checkpoint = serde_json::from_str(&text)
        .map_err(|e| CliError::runtime(format!("checkpoint {}: {e}", path.display())))?;
    Ok(file
        .entries
        .into_iter()
        .map(|e| {
            let o = ObjectiveVector {
                max_iae: f64::from_bits(e.objective_bits[0]),
                max_m_epsilon: f64::from_bits(e.objective_bits[1]),
                max_m_zeta: f64::from_bits(e.objective_bits[2]),
            };
            (e.param_bits, o)
        })
        .collect())
}

fn save_cache(path: &Path, cache: &Cache) -> Result<()> {
    let mut entries: Vec<CheckpointEntry> = cache
        .iter()
        .map(|(k, o)| CheckpointEntry {
            param_bits: k.clone(),
            objective_bits: [
                o.max_iae.to_bits(),
                o.max_m_epsilon.to_bits(),
                o.max_m_zeta.to_bits(),
            ],
        })
        .collect();
    entries.sort_by(|a, b| a.param_bits.cmp(&b.param_bits));
    write_json(path, &Checkpoint { entries })
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<()> {
    ctx.prepare()?;
    let mut timings = Timings::start();

    let campaign_text = fs::read_to_string(&args.campaign)
        .map_err(|e| CliError::config(format!("campaign file {}: {e}", args.campaign)))?;
    let campaign: CampaignFile = serde_json::from_str(&campaign_text)
        .map_err(|e| CliError::config(format!("campaign file: {e}")))?;
    let family = Family::from_name(&campaign.family)
        .ok_or_else(|| CliError::config(format!("unknown family \"{}\"", campaign.family)))?;
    let space = build_space(family, campaign.space.as_deref())?;
    let trajectories: Vec<Trajectory> = campaign
        .trajectories
        .iter()
        .map(|t| setups::load_trajectory(t))
        .collect::<Result<_>>()?;
    if trajectories.is_empty() {
        return Err(CliError::config("campaign lists no trajectories"));
    }
    let seed = campaign.seed.unwrap_or(ctx.seed);
    let provenance = Provenance::new(seed, &[campaign_text.as_bytes()]);
    timings.mark("load");

    let plant = PlantConfig::default();
    let checkpoint_path = ctx.path("checkpoint.json");
    let mut cache = load_cache(&checkpoint_path)?;
    let resumed = cache.len();
    let mut fresh: usize = 0;
    let mut since_save: usize = 0;

    let archive = direct_multisearch_batched(
        &space,
        |batch| {
            let misses: Vec<&Vec<f64>> =
                batch.iter().filter(|p| !cache.contains_key(&key(p))).collect();
            let evaluated: Vec<(Vec<u64>, ObjectiveVector)> = misses
                .par_iter()
                .map(|p| {
                    let o = match family.config(p) {
                        Ok(config) => evaluate_candidate(&config, &trajectories, &plant)
                            .unwrap_or_else(|_| ObjectiveVector::diverged()),
                        Err(_) => ObjectiveVector::diverged(),
                    };
                    (key(p), o)
                })
                .collect();
            fresh += evaluated.len();
            since_save += evaluated.len();
            cache.extend(evaluated);
            if since_save >= 50 {
                let _ = save_cache(&checkpoint_path, &cache);
                since_save = 0;
            }
            batch.iter().map(|p| cache[&key(p)]).collect()
        },
        campaign.budget,
        seed,
    )
    .map_err(|e| CliError::runtime(format!("campaign failed: {e:?}")))?;
    save_cache(&checkpoint_path, &cache)?;
    timings.mark("search");

    let names: Vec<&str> = space.specs.iter().map(|s| s.name).collect();
    write_archive_csv(&archive, &names, &provenance, &ctx.path("archive.csv"))?;
    write_json(
        &ctx.path("run_summary.json"),
        &serde_json::json!({
            "provenance": provenance,
            "family": family.name(),
            "budget": campaign.budget,
            "cached_evaluations": resumed,
            "fresh_evaluations": fresh,
            "archive_size": archive.len(),
        }),
    )?;
    timings.mark("write");
    timings.write(&ctx.path("timings.json"))?;

    println!(
        "tune: {} budget {} -> {} nondominated setups ({} cached, {} fresh evaluations)",
        family.name(),
        campaign.budget,
        archive.len(),
        resumed,
        fresh
    );
    Ok(())
}

fn build_space(family: Family, bounds: Option<&[SpaceBound]>) -> Result<ParameterSpace> {
    let mut space = family.space();
    if let Some(bounds) = bounds {
        for b in bounds {
            let spec = space
                .specs
                .iter_mut()
                .find(|s| s.name == b.name)
                .ok_or_else(|| {
                    CliError::config(format!(
                        "campaign space: \"{}\" is not a parameter of {}",
                        b.name,
                        family.name()
                    ))
                })?;
            *spec = ParameterSpec::new(spec.name, b.lower, b.upper);
        }
    }
    space
        .validate()
        .map_err(|e| CliError::config(format!("campaign space: {e:?}")))?;
    Ok(space)
}
