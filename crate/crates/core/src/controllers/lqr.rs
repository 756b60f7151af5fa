//! Infinite-horizon discrete LQR on the speed-parameterized error model,
//! with filtered derivative states and speed-scheduled gain.

use super::{ControllerError, Measurements, CONTROL_PERIOD};
use crate::mat::Mat;
use crate::numerics::{solve_dare, FilteredDerivative};
use crate::vehicle::{linearized_error_model, VehicleParams};

/// Speed change that triggers a gain recomputation, m/s.
const GAIN_RESCHEDULE_SPEED: f64 = 0.5;
/// Model speed floor; below this the error model degenerates.
const MODEL_SPEED_FLOOR: f64 = 1.0;

/// LQR gain for the error model at speed `vx`, `Q = diag(q)`, `R = 1`.
/// The returned row vector multiplies `[e_y, e_y_dot, e_psi, e_psi_dot]`
/// and yields a front-wheel angle.
pub fn lqr_gain(vx: f64, q: [f64; 4], params: &VehicleParams) -> Result<Mat, ControllerError> {
    let model = linearized_error_model(vx, params)
        .map_err(|_| ControllerError::InvalidConfig("model speed out of range"))?;
    let d = model.to_discrete_zoh(CONTROL_PERIOD);
    let qm = Mat::diag(&q);
    let r = Mat::identity(1);
    let sol = solve_dare(&d.a, &d.b, &qm, &r)
        .map_err(|_| ControllerError::InvalidConfig("riccati iteration failed"))?;
    Ok(sol.gain)
}

#[derive(Debug, Clone)]
pub struct LqrState {
    q: [f64; 4],
    params: VehicleParams,
    d_ey: FilteredDerivative,
    d_epsi: FilteredDerivative,
    gain: Option<Mat>,
    gain_vx: f64,
    u_prev: f64,
}

impl LqrState {
    pub fn new(q: [f64; 4], n: f64, params: VehicleParams) -> Result<Self, ControllerError> {
        let mk = || {
            FilteredDerivative::new(n, CONTROL_PERIOD)
                .map_err(|_| ControllerError::InvalidConfig("derivative filter"))
        };
        Ok(Self { q, params, d_ey: mk()?, d_epsi: mk()?, gain: None, gain_vx: 0.0, u_prev: 0.0 })
    }

    pub fn step(&mut self, m: &Measurements) -> f64 {
        // vehicle-offset convention: e_y = -y_1, e_psi = vehicle minus path
        let e1 = -m.y1;
        let e3 = -m.e_psi;
        let e2 = self.d_ey.step(e1);
        let e4 = self.d_epsi.step(e3);

        let vx_m = m.vx.max(MODEL_SPEED_FLOOR);
        if self.gain.is_none() || (vx_m - self.gain_vx).abs() > GAIN_RESCHEDULE_SPEED {
            match lqr_gain(vx_m, self.q, &self.params) {
                Ok(k) => {
                    self.gain = Some(k);
                    self.gain_vx = vx_m;
                }
                // hold the previous action on a solver fault
                Err(_) if self.gain.is_none() => return self.u_prev,
                Err(_) => {}
            }
        }
        let k = self.gain.as_ref().expect("gain cached");
        let delta = -(k[(0, 0)] * e1 + k[(0, 1)] * e2 + k[(0, 2)] * e3 + k[(0, 3)] * e4);
        let u = delta * self.params.steering_ratio / self.params.steering_max;
        self.u_prev = u;
        u
    }
}
