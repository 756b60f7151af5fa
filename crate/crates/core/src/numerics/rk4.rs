//! Classical fixed-step 4th-order Runge-Kutta integration.

use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IntegrationError {
    #[error("derivative evaluated to a non-finite value")]
    NonFiniteDerivative,
    #[error("step size must be positive")]
    NonPositiveStep,
}

/// One RK4 step over a fixed-size state array. The input is held constant
/// across the step (zero-order hold).
pub fn rk4_step<const N: usize>(
    state: &[f64; N],
    derivative: impl Fn(&[f64; N]) -> [f64; N],
    dt: f64,
) -> Result<[f64; N], IntegrationError> {
    if dt <= 0.0 {
        return Err(IntegrationError::NonPositiveStep);
    }
    let k1 = derivative(state);
    let k2 = derivative(&add_scaled(state, &k1, dt / 2.0));
    let k3 = derivative(&add_scaled(state, &k2, dt / 2.0));
    let k4 = derivative(&add_scaled(state, &k3, dt));
    let mut out = [0.0; N];
    for i in 0..N {
        let d = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
        if !d.is_finite() {
            return Err(IntegrationError::NonFiniteDerivative);
        }
        out[i] = state[i] + dt * d;
    }
    Ok(out)
}

fn add_scaled<const N: usize>(x: &[f64; N], d: &[f64; N], h: f64) -> [f64; N] {
    let mut out = *x;
    for i in 0..N {
        out[i] += h * d[i];
    }
    out
}

/// One RK4 step over a slice state with an explicit input vector.
pub fn integrate_rk4(
    state: &[f64],
    derivative: impl Fn(&[f64], &[f64]) -> Vec<f64>,
    input: &[f64],
    dt: f64,
) -> Result<Vec<f64>, IntegrationError> {
    if dt <= 0.0 {
        return Err(IntegrationError::NonPositiveStep);
    }
    let eval = |x: &[f64]| -> Result<Vec<f64>, IntegrationError> {
        let d = derivative(x, input);
        debug_assert_eq!(d.len(), state.len());
        if d.iter().any(|v| !v.is_finite()) {
            return Err(IntegrationError::NonFiniteDerivative);
        }
        Ok(d)
    };
    let shift = |x: &[f64], d: &[f64], h: f64| -> Vec<f64> {
        x.iter().zip(d).map(|(a, b)| a + h * b).collect()
    };
    let k1 = eval(state)?;
    let k2 = eval(&shift(state, &k1, dt / 2.0))?;
    let k3 = eval(&shift(state, &k2, dt / 2.0))?;
    let k4 = eval(&shift(state, &k3, dt))?;
    Ok(state
        .iter()
        .enumerate()
        .map(|(i, &x)| x + dt * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0)
        .collect())
}
