//! Predictive lateral controller: the error model is relinearized at the
//! current speed each cycle, held across the prediction horizon, and the
//! resulting box- and rate-constrained QP is solved with a capped iteration
//! budget and warm starting.

use alloc::vec;
use alloc::vec::Vec;

use super::{ControllerError, Measurements, CONTROL_PERIOD};
use crate::mat::Mat;
use crate::numerics::{solve_box_rate_qp, StateSpaceModel};
use crate::vehicle::{linearized_error_model, VehicleParams, PNEUMATIC_TRAIL, STEERING_KD, STEERING_KP};

/// QP solver iteration cap per control cycle.
pub const QP_ITERATION_CAP: usize = 10;
const MODEL_SPEED_FLOOR: f64 = 1.0;

/// Time constant of the steering droop caused by the self-aligning torque
/// loading the position loop, s.
pub fn steering_lag_time_constant(params: &VehicleParams) -> f64 {
    let nu = params.steering_viscosity + STEERING_KD;
    let k_sa = PNEUMATIC_TRAIL * 2.0 * params.cornering_front / params.steering_ratio;
    nu * params.steering_ratio / (STEERING_KP * params.steering_ratio + k_sa)
}

/// Discrete prediction model: the speed-parameterized error dynamics
/// augmented with the front-wheel tracking error as a fifth state. With the
/// rate-feedforward positioning drive the wheel follows the reference
/// immediately, but the self-aligning torque drags it back toward a drooped
/// equilibrium; ignoring that droop makes the prediction overestimate the
/// plant response. The input is the normalized steering command, the
/// realized front angle is `(delta_max / R_S) u + x5`.
pub fn prediction_model(vx: f64, params: &VehicleParams) -> Result<(Mat, Mat), ControllerError> {
    let model = linearized_error_model(vx, params)
        .map_err(|_| ControllerError::InvalidConfig("model speed out of range"))?;
    let nu = params.steering_viscosity + STEERING_KD;
    let rs = params.steering_ratio;
    // aligning stiffness seen at the front wheel, N m / rad
    let k_sa = PNEUMATIC_TRAIL * 2.0 * params.cornering_front / rs;
    let wheel = params.steering_max / rs;
    let mut a = Mat::zeros(5, 5);
    let mut b = Mat::zeros(5, 1);
    for i in 0..4 {
        for j in 0..4 {
            a[(i, j)] = model.a[(i, j)];
        }
        a[(i, 4)] = model.b[(i, 0)];
        b[(i, 0)] = model.b[(i, 0)] * wheel;
    }
    // nu R_S dot(x5) = -(K_P R_S + k_sa) x5 - k_sa wheel u
    //                  + (k_sa / v_x) (x2 - v_x x3 + l_f x4)
    // where the last term is the front slip relief from the body motion
    let denom = nu * rs;
    a[(4, 4)] = -(STEERING_KP * rs + k_sa) / denom;
    a[(4, 1)] = k_sa / (denom * vx);
    a[(4, 2)] = -k_sa / denom;
    a[(4, 3)] = k_sa * params.dist_front / (denom * vx);
    b[(4, 0)] = -k_sa * wheel / denom;
    let d = StateSpaceModel::continuous(a, b).to_discrete_zoh(CONTROL_PERIOD);
    Ok((d.a, d.b))
}

/// Stack the prediction into dense QP data: minimize
/// `0.5 z' H z + g' z` over the `h_c` free moves `z`, equivalent to
/// `sum_i y_i^2 + w sum_i (u_i - u_{i-1})^2` with moves beyond `h_c` held.
///
/// `a`, `b` are the discrete model (input already in normalized steering
/// units), `x0` the measured error state.
pub fn nlmpc_dense_matrices(
    a: &Mat,
    b: &Mat,
    h_p: usize,
    h_c: usize,
    w_du: f64,
    x0: &[f64],
    u_prev: f64,
) -> (Mat, Vec<f64>) {
    // first output component of A^i B, i = 0..h_p-1
    let mut impulse = Vec::with_capacity(h_p);
    let mut v = b.clone();
    for _ in 0..h_p {
        impulse.push(v[(0, 0)]);
        v = a * &v;
    }
    // free response outputs over the horizon
    let mut f0 = vec![0.0; h_p];
    let mut xi = Mat::col_vec(x0);
    for item in f0.iter_mut() {
        xi = a * &xi;
        *item = xi[(0, 0)];
    }
    // forced-response map from the h_c free moves to the h_p outputs
    let mut p = Mat::zeros(h_p, h_c);
    for i in 0..h_p {
        for j in 0..=i {
            p[(i, j.min(h_c - 1))] += impulse[i - j];
        }
    }
    // move-rate operator and its u_prev offset
    let mut d = Mat::identity(h_c);
    for i in 1..h_c {
        d[(i, i - 1)] = -1.0;
    }
    let pt = p.transpose();
    let dt = d.transpose();
    let mut h = &(&pt * &p) + &(&dt * &d).scale(w_du);
    h = h.scale(2.0);
    let ptf = &pt * &Mat::col_vec(&f0);
    let mut g = vec![0.0; h_c];
    for (i, item) in g.iter_mut().enumerate() {
        // D' c with c = [u_prev, 0, ..]: only the first column contributes
        let dtc = d[(0, i)] * u_prev;
        *item = 2.0 * (ptf[(i, 0)] - w_du * dtc);
    }
    (h, g)
}

#[derive(Debug, Clone)]
pub struct NlmpcState {
    h_p: usize,
    h_c: usize,
    w_du: f64,
    params: VehicleParams,
    model_vx: f64,
    a_d: Mat,
    b_d: Mat,
    u_prev: f64,
    /// Open-loop estimate of the front-wheel tracking error, rad.
    u_act: f64,
    warm: Vec<f64>,
    /// Cycles where the solve failed and the previous action was held.
    pub fault_count: usize,
}

impl NlmpcState {
    pub fn new(
        h_p: usize,
        h_c: usize,
        w_du: f64,
        params: VehicleParams,
    ) -> Result<Self, ControllerError> {
        if h_c == 0 || h_c > h_p {
            return Err(ControllerError::InvalidConfig("horizons must satisfy 0 < h_c <= h_p"));
        }
        let mut s = Self {
            h_p,
            h_c,
            w_du,
            params,
            model_vx: 0.0,
            a_d: Mat::identity(5),
            b_d: Mat::zeros(5, 1),
            u_prev: 0.0,
            u_act: 0.0,
            warm: vec![0.0; h_c],
            fault_count: 0,
        };
        s.relinearize(MODEL_SPEED_FLOOR)?;
        Ok(s)
    }

    fn relinearize(&mut self, vx: f64) -> Result<(), ControllerError> {
        let (a, b) = prediction_model(vx, &self.params)?;
        self.a_d = a;
        self.b_d = b;
        self.model_vx = vx;
        Ok(())
    }

    pub fn step(&mut self, m: &Measurements) -> f64 {
        let vx_m = m.vx.max(MODEL_SPEED_FLOOR);
        if (vx_m - self.model_vx).abs() > 1e-9 && self.relinearize(vx_m).is_err() {
            self.fault_count += 1;
            return self.u_prev;
        }
        // vehicle-offset error state (e_y positive left of the path), plus
        // the estimated actuator lag state
        let e_psi = -m.e_psi;
        let x0 = [
            -m.y1,
            m.vy + vx_m * e_psi,
            e_psi,
            m.yaw_rate - vx_m * m.kappa,
            self.u_act,
        ];
        let (h, g) = nlmpc_dense_matrices(&self.a_d, &self.b_d, self.h_p, self.h_c, self.w_du, &x0, self.u_prev);
        let rate = self.params.steering_rate_max * CONTROL_PERIOD / self.params.steering_max;
        // shift the previous optimal sequence as the initial guess
        let mut warm = self.warm.clone();
        warm.rotate_left(1);
        if let Some(last) = warm.last_mut() {
            *last = self.warm[self.h_c - 1];
        }
        let u = match solve_box_rate_qp(&h, &g, self.u_prev, 1.0, rate, &warm, QP_ITERATION_CAP) {
            Ok(z) => {
                let u = z[0];
                self.warm = z;
                self.u_prev = u;
                u
            }
            Err(_) => {
                self.fault_count += 1;
                self.u_prev
            }
        };
        // propagate the actuator estimate through the coming hold interval
        // with the same discrete model row the prediction uses
        let mut next = self.b_d[(4, 0)] * u;
        for (j, xj) in x0.iter().enumerate() {
            next += self.a_d[(4, j)] * xj;
        }
        self.u_act = next;
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn meas(y1: f64, vx: f64) -> Measurements {
        Measurements { y1, e_psi: 0.0, vx, vy: 0.0, yaw_rate: 0.0, kappa: 0.0 }
    }

    fn model(vx: f64) -> (Mat, Mat) {
        let p = VehicleParams::default();
        let d = linearized_error_model(vx, &p).unwrap().to_discrete_zoh(CONTROL_PERIOD);
        let b = d.b.scale(p.steering_max / p.steering_ratio);
        (d.a, b)
    }

    /// Explicit rollout of the prediction cost, independent of the stacked
    /// matrix assembly.
    fn rollout_cost(a: &Mat, b: &Mat, h_p: usize, h_c: usize, w: f64, x0: &[f64; 4], u_prev: f64, z: &[f64]) -> f64 {
        let mut x = Mat::col_vec(x0);
        let mut j = 0.0;
        for i in 0..h_p {
            let u = z[i.min(h_c - 1)];
            x = &(a * &x) + &b.scale(u);
            j += x[(0, 0)] * x[(0, 0)];
        }
        let mut prev = u_prev;
        for i in 0..h_c {
            j += w * (z[i] - prev) * (z[i] - prev);
            prev = z[i];
        }
        j
    }

    #[test]
    fn zero_state_zero_action() {
        let p = VehicleParams::default();
        let mut s = NlmpcState::new(11, 3, 15.0, p).unwrap();
        for _ in 0..5 {
            assert_relative_eq!(s.step(&meas(0.0, 10.0)), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn huge_rate_weight_freezes_the_action() {
        let p = VehicleParams::default();
        let mut s = NlmpcState::new(11, 3, 1e6, p).unwrap();
        let u = s.step(&meas(0.5, 10.0));
        assert!(u.abs() < 1e-3, "u = {u}");
    }

    #[test]
    fn stacked_matrices_minimize_the_rollout_cost() {
        let (a, b) = model(12.0);
        let (h_p, h_c, w) = (11, 3, 15.0);
        let x0 = [-0.3, 0.1, 0.05, -0.02];
        let u_prev = 0.02;
        let (h, g) = nlmpc_dense_matrices(&a, &b, h_p, h_c, w, &x0, u_prev);
        // unconstrained optimum from the stacked data
        let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
        let zstar = h.solve(&Mat::col_vec(&neg_g)).unwrap();
        let z: Vec<f64> = (0..h_c).map(|i| zstar[(i, 0)]).collect();
        let jstar = rollout_cost(&a, &b, h_p, h_c, w, &x0, u_prev, &z);
        // first-order optimality against the independent rollout cost
        for i in 0..h_c {
            for delta in [1e-4, -1e-4] {
                let mut zp = z.clone();
                zp[i] += delta;
                assert!(rollout_cost(&a, &b, h_p, h_c, w, &x0, u_prev, &zp) > jstar);
            }
        }
        // and the stacked quadratic reproduces the rollout cost value
        let mut quad = 0.0;
        for i in 0..h_c {
            for j in 0..h_c {
                quad += 0.5 * z[i] * h[(i, j)] * z[j];
            }
            quad += g[i] * z[i];
        }
        let constant = rollout_cost(&a, &b, h_p, h_c, w, &x0, u_prev, &vec![0.0; h_c])
            - 0.0; // J(0) carries the constant term
        assert_relative_eq!(quad + constant, jstar, max_relative = 1e-9);
    }

    #[test]
    fn rate_weight_monotonically_smooths_the_sequence() {
        let (a, b) = model(15.0);
        let x0 = [-0.6, 0.2, 0.1, 0.0];
        let rate = 10.0 * CONTROL_PERIOD / 8.48;
        let mut last = f64::INFINITY;
        for w in [1.0, 5.0, 25.0, 125.0, 625.0] {
            let (h, g) = nlmpc_dense_matrices(&a, &b, 13, 4, w, &x0, 0.0);
            let z = solve_box_rate_qp(&h, &g, 0.0, 1.0, rate, &[0.0; 4], 50).unwrap();
            let mut du2 = 0.0;
            let mut prev = 0.0;
            for &u in &z {
                du2 += (u - prev) * (u - prev);
                prev = u;
            }
            assert!(du2 <= last + 1e-12, "w={w}: {du2} > {last}");
            last = du2;
        }
    }

    #[test]
    fn warm_start_reaches_dense_solution_within_three_cycles() {
        // small state keeps the constraints inactive
        let p = VehicleParams::default();
        let mut s = NlmpcState::new(11, 3, 15.0, p).unwrap();
        let m = meas(0.02, 10.0);
        s.step(&m);
        s.step(&m);
        let u_prev = s.u_prev;
        let u_act = s.u_act;
        let u = s.step(&m);
        let (a, b) = prediction_model(10.0, &VehicleParams::default()).unwrap();
        // the third cycle must match its own dense unconstrained solve
        let x0 = [-0.02, 0.0, 0.0, 0.0, u_act];
        let (h, g) = nlmpc_dense_matrices(&a, &b, 11, 3, 15.0, &x0, u_prev);
        let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
        let dense = h.solve(&Mat::col_vec(&neg_g)).unwrap();
        assert_relative_eq!(u, dense[(0, 0)], epsilon = 1e-4);
    }

    #[test]
    fn rate_limit_binds_on_large_errors() {
        let p = VehicleParams::default();
        let rate = p.steering_rate_max * CONTROL_PERIOD / p.steering_max;
        let mut s = NlmpcState::new(11, 3, 15.0, p).unwrap();
        let u = s.step(&meas(2.5, 20.0));
        assert!(u.abs() <= rate + 1e-12, "first move {u} exceeds rate {rate}");
    }
}
