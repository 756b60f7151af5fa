//! The five lateral feedback laws, the shared feedforward/preview structure,
//! and the 20 Hz closed-loop runner.
//!
//! All laws regulate the preview deviation `y_1` to zero and emit a
//! normalized feedback action `u_fb` in `[-1, 1]`. The total steering-wheel
//! reference is `delta_t = delta_max * clamp(u_ff + u_fb)`.
//!
//! Internal sign bookkeeping: the model-based laws use the error-state
//! convention where `e_y` is the vehicle offset (positive left of the path),
//! which equals `-y_1`. Positive `u` steers left in every law.

mod lqr;
mod mfc;
mod nlmpc;
mod pid;
pub mod setups;

pub use lqr::{lqr_gain, LqrState};
pub use mfc::{MfcState, MFC_FILTER_C};
pub use nlmpc::{
    nlmpc_dense_matrices, prediction_model, steering_lag_time_constant, NlmpcState,
    QP_ITERATION_CAP,
};
pub use pid::PidState;

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::trajectory::Trajectory;
use crate::vehicle::{
    plant_step, steering_lowlevel_step, track_vehicle, TireModel, VehicleError, VehicleParams,
    STEERING_KD,
    VehicleState,
};

/// Outer-loop control period, s (20 Hz).
pub const CONTROL_PERIOD: f64 = 0.05;
/// Inner plant/steering integration step, s.
pub const PLANT_PERIOD: f64 = 0.001;
/// Closest-point error beyond which a run counts as diverged, m.
pub const DIVERGENCE_LIMIT: f64 = 3.0;

/// Fraction of the reference-rate torque fed forward to the steering drive.
pub const STEERING_FF_GAIN: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ControllerError {
    #[error("invalid controller configuration: {0}")]
    InvalidConfig(&'static str),
}

/// Speed-based variable preview: `d_p = d_p0 + v_x * t_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreviewConfig {
    /// Minimum preview distance, m.
    pub d_p0: f64,
    /// Preview time, s.
    pub t_p: f64,
}

impl PreviewConfig {
    pub fn distance(&self, vx: f64) -> f64 {
        self.d_p0 + vx.max(0.0) * self.t_p
    }

    fn validate(&self) -> Result<(), ControllerError> {
        if self.d_p0 >= 0.0 && self.t_p >= 0.0 {
            Ok(())
        } else {
            Err(ControllerError::InvalidConfig("preview parameters must be nonnegative"))
        }
    }
}

/// The feedback law and its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlLaw {
    Lqr { q1: f64, q2: f64, q3: f64, q4: f64, n: f64 },
    Mfc { k_p: f64, k_d: f64, alpha: f64 },
    Samfc { k_p: f64, k_d: f64, alpha0: f64, v_x0: f64, k_alpha: f64 },
    Pid { k_p: f64, k_i: f64, k_d: f64, n: f64 },
    Nlmpc { h_p: usize, h_c: usize, w_du: f64 },
}

/// A complete controller setup: law plus preview.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    pub law: ControlLaw,
    pub preview: PreviewConfig,
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), ControllerError> {
        self.preview.validate()?;
        match self.law {
            ControlLaw::Lqr { q1, q2, q3, q4, n } => {
                if q1 < 0.0 || q2 < 0.0 || q3 < 0.0 || q4 < 0.0 {
                    return Err(ControllerError::InvalidConfig("lqr weights must be nonnegative"));
                }
                if n <= 0.0 {
                    return Err(ControllerError::InvalidConfig("lqr derivative filter n must be positive"));
                }
            }
            ControlLaw::Mfc { k_p, k_d, alpha } => {
                if k_p < 0.0 || k_d < 0.0 {
                    return Err(ControllerError::InvalidConfig("mfc gains must be nonnegative"));
                }
                if alpha <= 0.0 {
                    return Err(ControllerError::InvalidConfig("mfc alpha must be positive"));
                }
            }
            ControlLaw::Samfc { k_p, k_d, alpha0, v_x0, k_alpha } => {
                if k_p < 0.0 || k_d < 0.0 || k_alpha < 0.0 || v_x0 < 0.0 {
                    return Err(ControllerError::InvalidConfig("samfc gains must be nonnegative"));
                }
                if alpha0 <= 0.0 {
                    return Err(ControllerError::InvalidConfig("samfc alpha0 must be positive"));
                }
            }
            ControlLaw::Pid { k_p, k_i, k_d, n } => {
                if k_p < 0.0 || k_i < 0.0 || k_d < 0.0 {
                    return Err(ControllerError::InvalidConfig("pid gains must be nonnegative"));
                }
                if n <= 0.0 {
                    return Err(ControllerError::InvalidConfig("pid derivative filter n must be positive"));
                }
            }
            ControlLaw::Nlmpc { h_p, h_c, w_du } => {
                if h_p == 0 || h_c == 0 || h_c > h_p {
                    return Err(ControllerError::InvalidConfig("horizons must satisfy 0 < h_c <= h_p"));
                }
                if w_du < 0.0 {
                    return Err(ControllerError::InvalidConfig("rate weight must be nonnegative"));
                }
            }
        }
        Ok(())
    }
}

/// Per-tick measurements handed to the feedback law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurements {
    /// Preview deviation, positive when the path lies to the left, m.
    pub y1: f64,
    /// Heading error (path minus vehicle), rad.
    pub e_psi: f64,
    pub vx: f64,
    pub vy: f64,
    pub yaw_rate: f64,
    /// Path curvature at the preview point, 1/m.
    pub kappa: f64,
}

/// Normalized anticipatory steering from path curvature.
pub fn feedforward(kappa: f64, params: &VehicleParams) -> f64 {
    let u = params.steering_ratio / params.steering_max * (params.wheelbase() * kappa).atan();
    u.clamp(-1.0, 1.0)
}

/// Runtime state of one controller instance.
#[derive(Debug, Clone)]
pub enum Controller {
    Lqr(LqrState),
    Mfc(MfcState),
    Pid(PidState),
    Nlmpc(NlmpcState),
}

impl Controller {
    pub fn new(config: &ControllerConfig, params: &VehicleParams) -> Result<Self, ControllerError> {
        config.validate()?;
        Ok(match config.law {
            ControlLaw::Lqr { q1, q2, q3, q4, n } => {
                Controller::Lqr(LqrState::new([q1, q2, q3, q4], n, *params)?)
            }
            ControlLaw::Mfc { k_p, k_d, alpha } => {
                Controller::Mfc(MfcState::fixed_alpha(k_p, k_d, alpha)?)
            }
            ControlLaw::Samfc { k_p, k_d, alpha0, v_x0, k_alpha } => {
                Controller::Mfc(MfcState::speed_adaptive(k_p, k_d, alpha0, v_x0, k_alpha)?)
            }
            ControlLaw::Pid { k_p, k_i, k_d, n } => Controller::Pid(PidState::new(k_p, k_i, k_d, n)?),
            ControlLaw::Nlmpc { h_p, h_c, w_du } => {
                Controller::Nlmpc(NlmpcState::new(h_p, h_c, w_du, *params)?)
            }
        })
    }

    /// One 20 Hz feedback evaluation; output clamped to `[-1, 1]`.
    pub fn step(&mut self, m: &Measurements) -> f64 {
        let u = match self {
            Controller::Lqr(s) => s.step(m),
            Controller::Mfc(s) => s.step(m),
            Controller::Pid(s) => s.step(m),
            Controller::Nlmpc(s) => s.step(m),
        };
        u.clamp(-1.0, 1.0)
    }
}

/// One logged outer-loop tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlTick {
    pub t: f64,
    /// Closest-point arclength, m.
    pub s: f64,
    pub y1: f64,
    pub e_psi: f64,
    pub vx: f64,
    pub kappa_preview: f64,
    pub u_ff: f64,
    pub u_fb: f64,
    /// Total steering-wheel reference, rad.
    pub delta_t: f64,
    /// Signed closest-point lateral error, m.
    pub e_y: f64,
}

/// Closed-loop run record.
#[derive(Debug, Clone, PartialEq)]
pub struct SimLog {
    pub ticks: Vec<ControlTick>,
    pub sample_time: f64,
    pub diverged: bool,
}

impl SimLog {
    pub fn max_abs_e_y(&self) -> f64 {
        self.ticks.iter().map(|t| t.e_y.abs()).fold(0.0, f64::max)
    }
}

/// Plant configuration for a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantConfig {
    pub params: VehicleParams,
    pub tire: TireModel,
}

impl Default for PlantConfig {
    fn default() -> Self {
        Self { params: VehicleParams::default(), tire: TireModel::Linear }
    }
}

/// Initial pose relative to the path start.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StartPose {
    /// Lateral offset, positive left of the path, m.
    pub lateral_offset: f64,
    /// Overrides the profile's initial speed when set.
    pub speed: Option<f64>,
}

/// Run the full 20 Hz control scheme on a trajectory. Deterministic given
/// `(trajectory, config, plant)`; the seed is recorded for provenance only.
pub fn run_closed_loop(
    trajectory: &Trajectory,
    config: &ControllerConfig,
    plant: &PlantConfig,
    seed: u64,
) -> Result<SimLog, ControllerError> {
    run_closed_loop_from(trajectory, config, plant, seed, StartPose::default())
}

pub fn run_closed_loop_from(
    trajectory: &Trajectory,
    config: &ControllerConfig,
    plant: &PlantConfig,
    _seed: u64,
    start: StartPose,
) -> Result<SimLog, ControllerError> {
    let mut controller = Controller::new(config, &plant.params)?;
    let path = &trajectory.path;
    let speeds = &trajectory.speed;
    debug_assert_eq!(path.len(), speeds.len());

    let p0 = &path[0];
    let (sin0, cos0) = p0.heading.sin_cos();
    let mut state = VehicleState {
        x: p0.x - start.lateral_offset * sin0,
        y: p0.y + start.lateral_offset * cos0,
        heading: p0.heading,
        vx: start.speed.unwrap_or(speeds[0]),
        ..Default::default()
    };

    let total = path.last().unwrap().s;
    // nominal traversal time, for the stuck-run guard
    let nominal: f64 = path
        .windows(2)
        .zip(speeds.windows(2))
        .map(|(p, v)| (p[1].s - p[0].s) / (0.5 * (v[0] + v[1])).max(0.3))
        .sum();
    let t_max = 3.0 * nominal + 60.0;

    let inner_steps = (CONTROL_PERIOD / PLANT_PERIOD).round() as usize;
    let mut ticks = Vec::new();
    let mut diverged = false;
    let mut hint = None;
    let mut t = 0.0;
    let mut delta_t_prev = 0.0;

    loop {
        let d_p = config.preview.distance(state.vx);
        let view = match track_vehicle(&state, path, d_p, hint) {
            Ok(v) => v,
            Err(VehicleError::EndOfPath) => break,
            Err(_) => {
                diverged = true;
                break;
            }
        };
        hint = Some(view.closest_index);
        if total - view.s < 1.0 {
            break;
        }

        let m = Measurements {
            y1: view.y1,
            e_psi: view.e_psi,
            vx: state.vx,
            vy: state.vy,
            yaw_rate: state.yaw_rate,
            kappa: view.kappa_preview,
        };
        let u_ff = feedforward(view.kappa_preview, &plant.params);
        let u_fb = controller.step(&m);
        let delta_t = plant.params.steering_max * (u_ff + u_fb).clamp(-1.0, 1.0);

        let a_cmd = speed_command(&state, trajectory, view.closest_index);

        ticks.push(ControlTick {
            t,
            s: view.s,
            y1: view.y1,
            e_psi: view.e_psi,
            vx: state.vx,
            kappa_preview: view.kappa_preview,
            u_ff,
            u_fb,
            delta_t,
            e_y: view.e_y,
        });

        if view.e_y.abs() > DIVERGENCE_LIMIT {
            diverged = true;
            break;
        }

        // reference-rate (velocity) feedforward of the positioning drive:
        // cancels the overdamped position-loop pole so the wheel follows the
        // reference up to the rate limit instead of lagging by K_D / K_P
        let ff_torque = STEERING_FF_GAIN
            * (STEERING_KD + plant.params.steering_viscosity)
            * (delta_t - delta_t_prev)
            / CONTROL_PERIOD;
        delta_t_prev = delta_t;

        let mut failed = false;
        for _ in 0..inner_steps {
            let torque = ff_torque
                + steering_lowlevel_step(state.steer_wheel, state.steer_wheel_rate, delta_t);
            match plant_step(&state, torque, a_cmd, PLANT_PERIOD, &plant.params, plant.tire) {
                Ok(next) => state = next,
                Err(_) => {
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            diverged = true;
            break;
        }
        t += CONTROL_PERIOD;
        if t > t_max {
            diverged = true;
            break;
        }
    }

    Ok(SimLog { ticks, sample_time: CONTROL_PERIOD, diverged })
}

/// Longitudinal acceleration command tracking the planned speed profile at a
/// short arclength lookahead (so the vehicle launches from rest).
fn speed_command(state: &VehicleState, trajectory: &Trajectory, closest: usize) -> f64 {
    let path = &trajectory.path;
    let speeds = &trajectory.speed;
    let look = (state.vx * CONTROL_PERIOD).max(0.5);
    let target_s = path[closest].s + look;
    let mut i = closest;
    while i + 1 < path.len() && path[i].s < target_s {
        i += 1;
    }
    let v_target = speeds[i];
    let a = (v_target - state.vx) / CONTROL_PERIOD;
    a.clamp(-trajectory.limits.a_x_min, trajectory.limits.a_x_max)
}
