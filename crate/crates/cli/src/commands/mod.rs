//! Subcommand implementations. Every command writes its artifacts under the
//! output directory; wall-clock timings go to a separate file so the data
//! artifacts stay byte-identical across reruns.

pub mod plot;
pub mod robustness;
pub mod select;
pub mod simulate;
pub mod table4;
pub mod tune;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::Result;

/// Flags shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Ctx {
    pub seed: u64,
    pub out: PathBuf,
}

impl Ctx {
    pub fn prepare(&self) -> Result<()> {
        fs::create_dir_all(&self.out)?;
        Ok(())
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

#[derive(Debug, Serialize)]
struct TimingStage {
    name: String,
    wall_seconds: f64,
}

/// Accumulates wall-clock spans and writes them as `timings.json`.
pub struct Timings {
    started: Instant,
    last: Instant,
    stages: Vec<TimingStage>,
}

impl Timings {
    pub fn start() -> Self {
        let now = Instant::now();
        Self { started: now, last: now, stages: Vec::new() }
    }

    /// Close the current span under `name`.
    pub fn mark(&mut self, name: &str) {
        let now = Instant::now();
        self.stages.push(TimingStage {
            name: name.to_string(),
            wall_seconds: now.duration_since(self.last).as_secs_f64(),
        });
        self.last = now;
    }

    pub fn write(mut self, path: &Path) -> Result<()> {
        self.stages.push(TimingStage {
            name: "total".to_string(),
            wall_seconds: self.started.elapsed().as_secs_f64(),
        });
        write_json(path, &serde_json::json!({ "stages": self.stages }))
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| crate::error::CliError::runtime(format!("{}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
