//! On-disk formats: controller JSON, vehicle parameter file, trajectory
//! CSV, metrics JSON and archive CSV.

use std::fs;
use std::path::Path;

use latbench_core::controllers::{ControlLaw, ControllerConfig, PreviewConfig};
use latbench_core::metrics::MetricsReport;
use latbench_core::trajectory::{DrivingLimits, PathPoint, Trajectory};
use latbench_core::tuning::{ArchiveEntry, ObjectiveVector, ParetoArchive};
use latbench_core::vehicle::VehicleParams;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::provenance::Provenance;

// ---------------------------------------------------------------- controller

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreviewFile {
    pub d_p0: f64,
    pub t_p: f64,
}

/// Controller config document: `{type, params{...}, preview{d_p0, t_p}}`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerFile {
    #[serde(rename = "type")]
    pub kind: String,
    pub params: serde_json::Value,
    pub preview: PreviewFile,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LqrParams {
    q1: f64,
    q2: f64,
    q3: f64,
    q4: f64,
    n: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MfcParams {
    k_p: f64,
    k_d: f64,
    alpha: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SamfcParams {
    k_p: f64,
    k_d: f64,
    alpha0: f64,
    v_x0: f64,
    k_alpha: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PidParams {
    k_p: f64,
    k_i: f64,
    k_d: f64,
    n: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NlmpcParams {
    h_p: usize,
    h_c: usize,
    w_du: f64,
}

pub fn parse_controller_json(text: &str) -> Result<ControllerConfig> {
    let file: ControllerFile =
        serde_json::from_str(text).map_err(|e| CliError::config(format!("controller config: {e}")))?;
    let params = file.params.clone();
    let law = match file.kind.as_str() {
        "lqr" => {
            let p: LqrParams = from_params(params)?;
            ControlLaw::Lqr { q1: p.q1, q2: p.q2, q3: p.q3, q4: p.q4, n: p.n }
        }
        "mfc" => {
            let p: MfcParams = from_params(params)?;
            ControlLaw::Mfc { k_p: p.k_p, k_d: p.k_d, alpha: p.alpha }
        }
        "samfc" => {
            let p: SamfcParams = from_params(params)?;
            ControlLaw::Samfc {
                k_p: p.k_p,
                k_d: p.k_d,
                alpha0: p.alpha0,
                v_x0: p.v_x0,
                k_alpha: p.k_alpha,
            }
        }
        "pid" => {
            let p: PidParams = from_params(params)?;
            ControlLaw::Pid { k_p: p.k_p, k_i: p.k_i, k_d: p.k_d, n: p.n }
        }
        "nlmpc" => {
            let p: NlmpcParams = from_params(params)?;
            ControlLaw::Nlmpc { h_p: p.h_p, h_c: p.h_c, w_du: p.w_du }
        }
        other => {
            return Err(CliError::config(format!(
                "controller config: unknown type \"{other}\" (expected lqr|mfc|samfc|pid|nlmpc)"
            )))
        }
    };
    let config = ControllerConfig {
        law,
        preview: PreviewConfig { d_p0: file.preview.d_p0, t_p: file.preview.t_p },
    };
    config.validate().map_err(CliError::config)?;
    Ok(config)
}

fn from_params<T: serde::de::DeserializeOwned>(value: serde_json::Value) -> Result<T> {
    serde_json::from_value(value).map_err(|e| CliError::config(format!("controller params: {e}")))
}

pub fn controller_to_json(config: &ControllerConfig) -> String {
    let (kind, params) = match config.law {
        ControlLaw::Lqr { q1, q2, q3, q4, n } => {
            ("lqr", serde_json::to_value(LqrParams { q1, q2, q3, q4, n }).unwrap())
        }
        ControlLaw::Mfc { k_p, k_d, alpha } => {
            ("mfc", serde_json::to_value(MfcParams { k_p, k_d, alpha }).unwrap())
        }
        ControlLaw::Samfc { k_p, k_d, alpha0, v_x0, k_alpha } => (
            "samfc",
            serde_json::to_value(SamfcParams { k_p, k_d, alpha0, v_x0, k_alpha }).unwrap(),
        ),
        ControlLaw::Pid { k_p, k_i, k_d, n } => {
            ("pid", serde_json::to_value(PidParams { k_p, k_i, k_d, n }).unwrap())
        }
        ControlLaw::Nlmpc { h_p, h_c, w_du } => {
            ("nlmpc", serde_json::to_value(NlmpcParams { h_p, h_c, w_du }).unwrap())
        }
    };
    let file = ControllerFile {
        kind: kind.to_string(),
        params,
        preview: PreviewFile { d_p0: config.preview.d_p0, t_p: config.preview.t_p },
    };
    let mut text = serde_json::to_string_pretty(&file).unwrap();
    text.push('\n');
    text
}

// ------------------------------------------------------------------- vehicle

/// Flat key-value document mirroring the plant parameter names (SI units).
/// Missing keys fall back to the bundled nominal values.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VehicleFile {
    pub mass: f64,
    pub yaw_inertia: f64,
    pub cornering_front: f64,
    pub cornering_rear: f64,
    pub dist_front: f64,
    pub dist_rear: f64,
    pub steering_inertia: f64,
    pub steering_viscosity: f64,
    pub steering_ratio: f64,
    pub steering_max: f64,
    pub steering_rate_max: f64,
    pub friction: f64,
    pub stiffness_slip_factor: f64,
    pub gravity: f64,
}

impl Default for VehicleFile {
    fn default() -> Self {
        let p = VehicleParams::default();
        Self {
            mass: p.mass,
            yaw_inertia: p.yaw_inertia,
            cornering_front: p.cornering_front,
            cornering_rear: p.cornering_rear,
            dist_front: p.dist_front,
            dist_rear: p.dist_rear,
            steering_inertia: p.steering_inertia,
            steering_viscosity: p.steering_viscosity,
            steering_ratio: p.steering_ratio,
            steering_max: p.steering_max,
            steering_rate_max: p.steering_rate_max,
            friction: p.friction,
            stiffness_slip_factor: p.stiffness_slip_factor,
            gravity: p.gravity,
        }
    }
}

pub fn parse_vehicle_toml(text: &str) -> Result<VehicleParams> {
    let file: VehicleFile =
        toml::from_str(text).map_err(|e| CliError::config(format!("vehicle config: {e}")))?;
    let params = VehicleParams {
        mass: file.mass,
        yaw_inertia: file.yaw_inertia,
        cornering_front: file.cornering_front,
        cornering_rear: file.cornering_rear,
        dist_front: file.dist_front,
        dist_rear: file.dist_rear,
        steering_inertia: file.steering_inertia,
        steering_viscosity: file.steering_viscosity,
        steering_ratio: file.steering_ratio,
        steering_max: file.steering_max,
        steering_rate_max: file.steering_rate_max,
        friction: file.friction,
        stiffness_slip_factor: file.stiffness_slip_factor,
        gravity: file.gravity,
    };
    params.validate().map_err(|e| CliError::config(format!("vehicle config: {e}")))?;
    Ok(params)
}

// ---------------------------------------------------------------- trajectory

/// Trajectory CSV: header `s,x,y,heading,curvature,speed`, one row per
/// sample point. A leading `#` provenance comment is permitted.
pub fn write_trajectory_csv(
    trajectory: &Trajectory,
    provenance: &Provenance,
    path: &Path,
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&provenance.csv_comment());
    out.push_str("s,x,y,heading,curvature,speed\n");
    for (p, v) in trajectory.path.iter().zip(&trajectory.speed) {
        out.push_str(&format!("{},{},{},{},{},{}\n", p.s, p.x, p.y, p.heading, p.kappa, v));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_trajectory_csv(path: &Path) -> Result<Trajectory> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("trajectory file {}: {e}", path.display())))?;
    let mut points = Vec::new();
    let mut speeds = Vec::new();
    let mut saw_header = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != "s,x,y,heading,curvature,speed" {
                return Err(CliError::config(format!(
                    "trajectory file {}: expected header s,x,y,heading,curvature,speed",
                    path.display()
                )));
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(CliError::config(format!(
                "trajectory file {} line {}: expected 6 fields",
                path.display(),
                lineno + 1
            )));
        }
        let num = |i: usize| -> Result<f64> {
            fields[i].parse().map_err(|_| {
                CliError::config(format!(
                    "trajectory file {} line {}: bad number \"{}\"",
                    path.display(),
                    lineno + 1,
                    fields[i]
                ))
            })
        };
        points.push(PathPoint {
            s: num(0)?,
            x: num(1)?,
            y: num(2)?,
            heading: num(3)?,
            kappa: num(4)?,
        });
        speeds.push(num(5)?);
    }
    if points.len() < 2 {
        return Err(CliError::config(format!(
            "trajectory file {}: needs at least two sample points",
            path.display()
        )));
    }
    let v_max = speeds.iter().cloned().fold(0.0, f64::max);
    // the file carries geometry and the planned speeds; the driving limits
    // only bound the speed-tracking acceleration during simulation
    let limits = DrivingLimits {
        v_max_kmh: (v_max * 3.6).max(1.0),
        a_x_max: 1.5,
        a_x_min: 2.0,
        a_y_max: 4.0,
    };
    let purpose = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trajectory".to_string());
    Ok(Trajectory { path: points, speed: speeds, limits, purpose })
}

/// Manifest describing the generated benchmark files and their limits.
#[derive(Debug, Serialize, Deserialize)]
pub struct SuiteManifest {
    pub provenance: Provenance,
    pub trajectories: Vec<SuiteTrajectory>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SuiteTrajectory {
    pub name: String,
    pub file: String,
    pub purpose: String,
    pub length_m: f64,
    pub v_max_kmh: f64,
    pub a_x_max: f64,
    pub a_x_min: f64,
    pub a_y_max: f64,
}

// ------------------------------------------------------------------- metrics

/// Metrics report JSON; spectral indicators are null when the signal is too
/// short for a full analysis window.
#[derive(Debug, Serialize, Deserialize)]
pub struct MetricsFile {
    pub provenance: Provenance,
    pub iae: f64,
    pub iae_raw: f64,
    pub mle: f64,
    pub m_epsilon: Option<f64>,
    pub m_zeta: Option<f64>,
    pub diverged: bool,
}

impl MetricsFile {
    pub fn new(report: &MetricsReport, provenance: Provenance) -> Self {
        Self {
            provenance,
            iae: report.iae,
            iae_raw: report.iae_raw,
            mle: report.mle,
            m_epsilon: report.m_epsilon,
            m_zeta: report.m_zeta,
            diverged: report.diverged,
        }
    }
}

// ------------------------------------------------------------------- archive

/// Archive CSV: provenance comment, then
/// `index,<param names...>,max_iae,max_m_epsilon,max_m_zeta,robustness_pct`.
pub fn write_archive_csv(
    archive: &ParetoArchive,
    param_names: &[&str],
    provenance: &Provenance,
    path: &Path,
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&provenance.csv_comment());
    out.push_str("index");
    for name in param_names {
        out.push_str(&format!(",{name}"));
    }
    out.push_str(",max_iae,max_m_epsilon,max_m_zeta,robustness_pct\n");
    for e in archive.entries() {
        out.push_str(&format!("{}", e.index));
        for p in &e.params {
            out.push_str(&format!(",{p}"));
        }
        out.push_str(&format!(
            ",{},{},{}",
            e.objectives.max_iae, e.objectives.max_m_epsilon, e.objectives.max_m_zeta
        ));
        match e.robustness_pct {
            Some(r) => out.push_str(&format!(",{r}\n")),
            None => out.push_str(",\n"),
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_archive_csv(path: &Path, param_count: usize) -> Result<ParetoArchive> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("archive file {}: {e}", path.display())))?;
    let mut archive = ParetoArchive::new();
    let mut saw_header = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != param_count + 5 {
            return Err(CliError::config(format!(
                "archive file {} line {}: expected {} fields",
                path.display(),
                lineno + 1,
                param_count + 5
            )));
        }
        let bad = |what: &str| {
            CliError::config(format!("archive file {} line {}: bad {what}", path.display(), lineno + 1))
        };
        let index: u64 = fields[0].parse().map_err(|_| bad("index"))?;
        let mut params = Vec::with_capacity(param_count);
        for f in &fields[1..=param_count] {
            params.push(f.parse().map_err(|_| bad("parameter"))?);
        }
        let obj = ObjectiveVector {
            max_iae: fields[param_count + 1].parse().map_err(|_| bad("objective"))?,
            max_m_epsilon: fields[param_count + 2].parse().map_err(|_| bad("objective"))?,
            max_m_zeta: fields[param_count + 3].parse().map_err(|_| bad("objective"))?,
        };
        let robustness_pct = if fields[param_count + 4].is_empty() {
            None
        } else {
            Some(fields[param_count + 4].parse().map_err(|_| bad("robustness"))?)
        };
        archive.insert(ArchiveEntry { index, params, objectives: obj, robustness_pct });
    }
    Ok(archive)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn controller_json_roundtrip_all_families() {
        for name in ["lqr-1", "mfc-2", "samfc-3", "pid-1", "nlmpc-2"] {
            let config = crate::setups::bundled(name).unwrap();
            let text = controller_to_json(&config);
            let back = parse_controller_json(&text).unwrap();
            assert_eq!(config, back, "{name}");
        }
    }

    #[test]
    fn missing_preview_is_named_in_the_error() {
        let err =
            parse_controller_json(r#"{"type":"pid","params":{"k_p":1,"k_i":0,"k_d":0.1,"n":5}}"#)
                .unwrap_err();
        assert!(err.to_string().contains("preview"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_controller_type_rejected() {
        let err = parse_controller_json(
            r#"{"type":"fuzzy","params":{},"preview":{"d_p0":0,"t_p":0}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("fuzzy"));
    }

    #[test]
    fn vehicle_toml_partial_overrides() {
        let p = parse_vehicle_toml("mass = 1500.0\nfriction = 0.8\n").unwrap();
        assert_eq!(p.mass, 1500.0);
        assert_eq!(p.friction, 0.8);
        assert_eq!(p.yaw_inertia, VehicleParams::default().yaw_inertia);
        let err = parse_vehicle_toml("mss = 1500.0\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn trajectory_csv_roundtrip() {
        let traj = crate::setups::builtin_trajectory("t1").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("t1.csv");
        let prov = Provenance::new(0, &[b"t1"]);
        write_trajectory_csv(&traj, &prov, &file).unwrap();
        let back = read_trajectory_csv(&file).unwrap();
        assert_eq!(back.path.len(), traj.path.len());
        assert_eq!(back.speed, traj.speed);
        for (a, b) in back.path.iter().zip(&traj.path) {
            assert_eq!(a.s, b.s);
            assert_eq!(a.kappa, b.kappa);
        }
    }

    #[test]
    fn archive_csv_roundtrip() {
        let mut archive = ParetoArchive::new();
        archive.insert(ArchiveEntry {
            index: 3,
            params: vec![0.1, 2.0],
            objectives: ObjectiveVector { max_iae: 0.2, max_m_epsilon: 0.1, max_m_zeta: 0.3 },
            robustness_pct: Some(92.5),
        });
        archive.insert(ArchiveEntry {
            index: 5,
            params: vec![0.3, 1.0],
            objectives: ObjectiveVector { max_iae: 0.1, max_m_epsilon: 0.2, max_m_zeta: 0.3 },
            robustness_pct: None,
        });
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("archive.csv");
        let prov = Provenance::new(1, &[b"campaign"]);
        write_archive_csv(&archive, &["k_p", "k_d"], &prov, &file).unwrap();
        let back = read_archive_csv(&file, 2).unwrap();
        assert_eq!(back, archive);
    }
}
