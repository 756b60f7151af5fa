//! Second-order model-free control (iPD on an ultra-local model), in both
//! fixed-gain and speed-adaptive-gain variants.
//!
//! The regulated output is `z = -y_1`, so the input gain of the ultra-local
//! model `z'' = F + alpha u` is positive with positive `alpha` and positive
//! `u` steering left.

use super::{ControllerError, Measurements, CONTROL_PERIOD};
use crate::numerics::FilteredDerivative;

/// Derivative-filter smoothing, fixed by design.
pub const MFC_FILTER_C: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq)]
enum AlphaLaw {
    Fixed(f64),
    /// `alpha = alpha0` below `v_x0`, then grows with slope `k_alpha`.
    Adaptive { alpha0: f64, v_x0: f64, k_alpha: f64 },
}

#[derive(Debug, Clone)]
pub struct MfcState {
    k_p: f64,
    k_d: f64,
    alpha: AlphaLaw,
    d1: FilteredDerivative,
    d2: FilteredDerivative,
    u_prev: f64,
    f_hat: f64,
}

impl MfcState {
    pub fn fixed_alpha(k_p: f64, k_d: f64, alpha: f64) -> Result<Self, ControllerError> {
        if alpha <= 0.0 {
            return Err(ControllerError::InvalidConfig("alpha must be positive"));
        }
        Self::build(k_p, k_d, AlphaLaw::Fixed(alpha))
    }

    pub fn speed_adaptive(
        k_p: f64,
        k_d: f64,
        alpha0: f64,
        v_x0: f64,
        k_alpha: f64,
    ) -> Result<Self, ControllerError> {
        if alpha0 <= 0.0 {
            return Err(ControllerError::InvalidConfig("alpha0 must be positive"));
        }
        Self::build(k_p, k_d, AlphaLaw::Adaptive { alpha0, v_x0, k_alpha })
    }

    fn build(k_p: f64, k_d: f64, alpha: AlphaLaw) -> Result<Self, ControllerError> {
        let mk = || {
            FilteredDerivative::new(MFC_FILTER_C, CONTROL_PERIOD)
                .map_err(|_| ControllerError::InvalidConfig("derivative filter"))
        };
        Ok(Self {
            k_p,
            k_d,
            alpha,
            d1: mk()?,
            d2: mk()?,
            u_prev: 0.0,
            f_hat: 0.0,
        })
    }

    /// Input gain at longitudinal speed `vx`.
    pub fn alpha_at(&self, vx: f64) -> f64 {
        match self.alpha {
            AlphaLaw::Fixed(a) => a,
            AlphaLaw::Adaptive { alpha0, v_x0, k_alpha } => {
                if vx < v_x0 {
                    alpha0
                } else {
                    k_alpha * (vx - v_x0) + alpha0
                }
            }
        }
    }

    /// Latest disturbance estimate.
    pub fn f_hat(&self) -> f64 {
        self.f_hat
    }

    pub fn step(&mut self, m: &Measurements) -> f64 {
        // zero filter initial conditions matter: in incremental form the law
        // integrates the filtered derivatives, so the zero state anchors the
        // regulated position to zero
        let z = -m.y1;
        let z_dot = self.d1.step(z);
        let z_ddot = self.d2.step(z_dot);

        let alpha = self.alpha_at(m.vx);
        self.f_hat = z_ddot - alpha * self.u_prev;
        // reference z_r = 0 with zero derivatives
        let e = -z;
        let e_dot = -z_dot;
        let u = (-self.f_hat + self.k_p * e + self.k_d * e_dot) / alpha;
        // the estimator remembers the law's own previous action, not the
        // clamped plant input: clipping the memory would corrupt the
        // zero-state position anchor during large transients
        self.u_prev = u;
        u
    }
}
