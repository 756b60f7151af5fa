//! Bundled artifacts: the fifteen controller setup files and the six
//! benchmark trajectory analogs, addressable by name.

use std::path::Path;

use latbench_core::controllers::ControllerConfig;
use latbench_core::trajectory::{benchmark_suite, Trajectory};

use crate::error::{CliError, Result};
use crate::formats;

pub const SETUP_NAMES: [&str; 15] = [
    "lqr-1", "lqr-2", "lqr-3", "mfc-1", "mfc-2", "mfc-3", "samfc-1", "samfc-2", "samfc-3",
    "pid-1", "pid-2", "pid-3", "nlmpc-1", "nlmpc-2", "nlmpc-3",
];

macro_rules! asset {
    ($name:literal) => {
        ($name, include_str!(concat!("../assets/setups/", $name, ".json")))
    };
}

const SETUP_ASSETS: [(&str, &str); 15] = [
    asset!("lqr-1"),
    asset!("lqr-2"),
    asset!("lqr-3"),
    asset!("mfc-1"),
    asset!("mfc-2"),
    asset!("mfc-3"),
    asset!("samfc-1"),
    asset!("samfc-2"),
    asset!("samfc-3"),
    asset!("pid-1"),
    asset!("pid-2"),
    asset!("pid-3"),
    asset!("nlmpc-1"),
    asset!("nlmpc-2"),
    asset!("nlmpc-3"),
];

pub fn bundled_json(name: &str) -> Option<&'static str> {
    SETUP_ASSETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

/// A bundled setup parsed through the standard config format.
pub fn bundled(name: &str) -> Result<ControllerConfig> {
    let text = bundled_json(name)
        .ok_or_else(|| CliError::config(format!("unknown bundled setup \"{name}\"")))?;
    formats::parse_controller_json(text)
}

/// `arg` is either a bundled setup name or a path to a controller JSON file.
pub fn load_controller(arg: &str) -> Result<ControllerConfig> {
    if let Some(text) = bundled_json(arg) {
        return formats::parse_controller_json(text);
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(CliError::config(format!(
            "\"{arg}\" is neither a bundled setup name nor an existing controller file"
        )));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("controller file {arg}: {e}")))?;
    formats::parse_controller_json(&text)
}

pub const TRAJECTORY_NAMES: [&str; 6] = ["t1", "t2", "t3", "t4", "t5", "t6"];

/// One of the six benchmark analogs, `"t1"` through `"t6"`.
pub fn builtin_trajectory(name: &str) -> Result<Trajectory> {
    let idx = TRAJECTORY_NAMES
        .iter()
        .position(|n| *n == name)
        .ok_or_else(|| CliError::config(format!("unknown trajectory \"{name}\"")))?;
    Ok(benchmark_suite().swap_remove(idx))
}

/// `arg` is either a builtin trajectory name or a path to a trajectory CSV.
pub fn load_trajectory(arg: &str) -> Result<Trajectory> {
    if TRAJECTORY_NAMES.contains(&arg) {
        return builtin_trajectory(arg);
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(CliError::config(format!(
            "\"{arg}\" is neither a builtin trajectory name nor an existing trajectory file"
        )));
    }
    formats::read_trajectory_csv(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use latbench_core::controllers::setups as core_setups;

    #[test]
    fn bundled_files_match_library_setups() {
        for name in SETUP_NAMES {
            let from_file = bundled(name).unwrap();
            let from_lib = core_setups::by_name(name).unwrap();
            assert_eq!(from_file, from_lib, "{name}");
        }
    }

    #[test]
    fn builtin_trajectories_resolve() {
        for name in TRAJECTORY_NAMES {
            let t = builtin_trajectory(name).unwrap();
            assert!(t.length() > 300.0, "{name}");
        }
        assert!(builtin_trajectory("t7").is_err());
    }
}
