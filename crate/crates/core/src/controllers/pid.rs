//! Discrete parallel PID: backward-difference integrator and first-order
//! filtered derivative, realized exactly from the Z-domain form
//! `U/E = K_p + K_i T_s z^-1 / (1 - z^-1) + K_d N (1 - z^-1) / (1 - (1 - N T_s) z^-1)`.

use super::{ControllerError, Measurements, CONTROL_PERIOD};

#[derive(Debug, Clone)]
pub struct PidState {
    k_p: f64,
    k_i: f64,
    k_d: f64,
    /// Derivative-branch pole location `1 - n T_s`.
    d_pole: f64,
    n: f64,
    integral: f64,
    e_prev: f64,
    d_prev: f64,
}

impl PidState {
    pub fn new(k_p: f64, k_i: f64, k_d: f64, n: f64) -> Result<Self, ControllerError> {
        if n <= 0.0 {
            return Err(ControllerError::InvalidConfig("derivative filter n must be positive"));
        }
        Ok(Self {
            k_p,
            k_i,
            k_d,
            d_pole: 1.0 - n * CONTROL_PERIOD,
            n,
            integral: 0.0,
            e_prev: 0.0,
            d_prev: 0.0,
        })
    }

    pub fn step(&mut self, m: &Measurements) -> f64 {
        // positive deviation (path to the left) steers left
        let e = m.y1;
        self.integral += self.k_i * CONTROL_PERIOD * self.e_prev;
        let d = self.d_pole * self.d_prev + self.k_d * self.n * (e - self.e_prev);
        self.e_prev = e;
        self.d_prev = d;
        self.k_p * e + self.integral + d
    }
}
