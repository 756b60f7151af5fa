//! Shared numerical kernels: fixed-step integration, the discrete Riccati
//! solver, discrete filters, short-time Fourier analysis, seeded sampling
//! and a small box/rate-constrained QP.

mod dare;
mod filter;
mod qp;
mod random;
mod rk4;
mod stft;

pub use dare::{dare_residual, solve_dare, DareError, DareSolution};
pub use filter::{highpass_filter, FilterError, FilteredDerivative, HighPassBiquad};
pub use qp::{solve_box_rate_qp, QpError};
pub use random::{Distribution, DistributionError, SeedStream};
pub use rk4::{integrate_rk4, rk4_step, IntegrationError};
pub use stft::{stft_power, Spectrogram, StftError};

use crate::mat::Mat;

/// Linear state-space model `xdot = A x + B u` (continuous) or
/// `x[k+1] = A x[k] + B u[k]` (discrete, `sample_time` set).
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    pub a: Mat,
    pub b: Mat,
    /// Present iff the model is discrete-time.
    pub sample_time: Option<f64>,
}

impl StateSpaceModel {
    pub fn continuous(a: Mat, b: Mat) -> Self {
        assert_eq!(a.rows(), a.cols());
        assert_eq!(a.rows(), b.rows());
        Self { a, b, sample_time: None }
    }

    pub fn discrete(a: Mat, b: Mat, sample_time: f64) -> Self {
        assert!(sample_time > 0.0, "sample_time must be positive");
        assert_eq!(a.rows(), a.cols());
        assert_eq!(a.rows(), b.rows());
        Self { a, b, sample_time: Some(sample_time) }
    }

    pub fn is_discrete(&self) -> bool {
        self.sample_time.is_some()
    }

    /// Zero-order-hold discretization of a continuous model.
    ///
    /// Uses the augmented-matrix exponential, so a singular `A` (common for
    /// error models whose first row is pure integration) is fine.
    pub fn to_discrete_zoh(&self, sample_time: f64) -> StateSpaceModel {
        assert!(self.sample_time.is_none(), "model is already discrete");
        assert!(sample_time > 0.0);
        let n = self.a.rows();
        let m = self.b.cols();
        let mut aug = Mat::zeros(n + m, n + m);
        for r in 0..n {
            for c in 0..n {
                aug[(r, c)] = self.a[(r, c)] * sample_time;
            }
            for c in 0..m {
                aug[(r, n + c)] = self.b[(r, c)] * sample_time;
            }
        }
        let e = aug.expm();
        let mut ad = Mat::zeros(n, n);
        let mut bd = Mat::zeros(n, m);
        for r in 0..n {
            for c in 0..n {
                ad[(r, c)] = e[(r, c)];
            }
            for c in 0..m {
                bd[(r, c)] = e[(r, n + c)];
            }
        }
        StateSpaceModel::discrete(ad, bd, sample_time)
    }
}
