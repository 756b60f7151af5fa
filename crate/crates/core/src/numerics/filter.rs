//! Discrete filters: the filtered derivative operator shared by the LQR,
//! MFC and PID laws, and the Butterworth high-pass used by the spectral
//! metrics.
//!
//! The derivative operator is the discrete realization of
//! `D(z) = (1/T_s) * (1 - z^-1) / (C + (1 - C) z^-1)`, i.e.
//! `y[k] = ((x[k] - x[k-1]) / T_s - (1 - C) y[k-1]) / C`.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FilterError {
    #[error("smoothing parameter must be positive")]
    NonPositiveSmoothing,
    #[error("sample time must be positive")]
    NonPositiveSampleTime,
    #[error("cutoff must lie in (0, f_s/2)")]
    CutoffOutOfRange,
}

/// State of a first-order filtered derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredDerivative {
    smoothing: f64,
    sample_time: f64,
    previous_input: f64,
    previous_output: f64,
}

impl FilteredDerivative {
    pub fn new(smoothing: f64, sample_time: f64) -> Result<Self, FilterError> {
        if smoothing <= 0.0 {
            return Err(FilterError::NonPositiveSmoothing);
        }
        if sample_time <= 0.0 {
            return Err(FilterError::NonPositiveSampleTime);
        }
        Ok(Self { smoothing, sample_time, previous_input: 0.0, previous_output: 0.0 })
    }

    pub fn reset(&mut self) {
        self.previous_input = 0.0;
        self.previous_output = 0.0;
    }

    pub fn step(&mut self, sample: f64) -> f64 {
        let c = self.smoothing;
        let diff = (sample - self.previous_input) / self.sample_time;
        let out = (diff - (1.0 - c) * self.previous_output) / c;
        self.previous_input = sample;
        self.previous_output = out;
        out
    }
}

/// One biquad section of a 2nd-order Butterworth high-pass (bilinear
/// transform with prewarping).
#[derive(Debug, Clone, PartialEq)]
pub struct HighPassBiquad {
    b: [f64; 3],
    a: [f64; 2],
    x: [f64; 2],
    y: [f64; 2],
}

impl HighPassBiquad {
    pub fn new(sample_rate: f64, cutoff: f64) -> Result<Self, FilterError> {
        if !(cutoff > 0.0 && cutoff < sample_rate / 2.0) {
            return Err(FilterError::CutoffOutOfRange);
        }
        let k = (core::f64::consts::PI * cutoff / sample_rate).tan();
        let sqrt2 = 2.0f64.sqrt();
        let norm = 1.0 / (1.0 + sqrt2 * k + k * k);
        Ok(Self {
            b: [norm, -2.0 * norm, norm],
            a: [2.0 * (k * k - 1.0) * norm, (1.0 - sqrt2 * k + k * k) * norm],
            x: [0.0; 2],
            y: [0.0; 2],
        })
    }

    pub fn step(&mut self, sample: f64) -> f64 {
        let out = self.b[0] * sample + self.b[1] * self.x[0] + self.b[2] * self.x[1]
            - self.a[0] * self.y[0]
            - self.a[1] * self.y[1];
        self.x = [sample, self.x[0]];
        self.y = [out, self.y[0]];
        out
    }
}

/// High-pass an entire series.
pub fn highpass_filter(signal: &[f64], sample_rate: f64, cutoff: f64) -> Result<Vec<f64>, FilterError> {
    let mut biquad = HighPassBiquad::new(sample_rate, cutoff)?;
    Ok(signal.iter().map(|&s| biquad.step(s)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use approx::assert_relative_eq;

    #[test]
    fn derivative_of_constant_converges_to_zero() {
        let mut d = FilteredDerivative::new(1.5, 0.05).unwrap();
        let first = d.step(2.0);
        let mut last = first;
        for _ in 0..9 {
            last = d.step(2.0);
        }
        // transient decays geometrically by |1-C|/C = 1/3 per sample
        assert!(last.abs() < 1e-4 * first.abs(), "residual {last}");
        for _ in 0..10 {
            last = d.step(2.0);
        }
        assert!(last.abs() < 1e-6, "residual {last}");
    }

    #[test]
    fn derivative_of_ramp_reaches_slope() {
        let mut d = FilteredDerivative::new(1.5, 0.05).unwrap();
        let mut out = 0.0;
        for k in 0..200 {
            out = d.step(2.0 * 0.05 * k as f64);
        }
        assert_relative_eq!(out, 2.0, epsilon = 1e-6);
    }

    #[test]
    fn unit_step_matches_direct_recursion_oracle() {
        let c = 1.5;
        let ts = 0.05;
        let mut d = FilteredDerivative::new(c, ts).unwrap();
        // direct difference-equation recursion with zero initial conditions
        let mut x_prev = 0.0;
        let mut y_prev = 0.0;
        for _ in 0..30 {
            let x = 1.0;
            let expected = ((x - x_prev) / ts - (1.0 - c) * y_prev) / c;
            let got = d.step(x);
            assert_relative_eq!(got, expected, epsilon = 1e-14);
            x_prev = x;
            y_prev = expected;
        }
    }

    #[test]
    fn derivative_is_linear() {
        let xs: Vec<f64> = (0..50).map(|k| (k as f64 * 0.3).sin()).collect();
        let ys: Vec<f64> = (0..50).map(|k| (k as f64 * 0.11).cos()).collect();
        let (a, b) = (2.5, -0.7);
        let mut dx = FilteredDerivative::new(1.5, 0.05).unwrap();
        let mut dy = FilteredDerivative::new(1.5, 0.05).unwrap();
        let mut dz = FilteredDerivative::new(1.5, 0.05).unwrap();
        for (&x, &y) in xs.iter().zip(&ys) {
            let fx = dx.step(x);
            let fy = dy.step(y);
            let fz = dz.step(a * x + b * y);
            assert_relative_eq!(fz, a * fx + b * fy, epsilon = 1e-9);
        }
    }

    fn steady_amplitude(freq: f64, fs: f64, cutoff: f64) -> f64 {
        let n = 40.0 * fs / freq; // long run, measure the tail
        let total = n as usize;
        let signal: Vec<f64> = (0..total)
            .map(|k| (2.0 * core::f64::consts::PI * freq * k as f64 / fs).sin())
            .collect();
        let filtered = highpass_filter(&signal, fs, cutoff).unwrap();
        filtered[total / 2..].iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    #[test]
    fn dc_is_rejected() {
        let signal = [1.0f64; 400];
        let out = highpass_filter(&signal, 20.0, 0.5).unwrap();
        let tail = out[200..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(tail < 1e-3, "tail {tail}");
    }

    #[test]
    fn passband_tone_preserved() {
        let amp = steady_amplitude(6.0, 20.0, 4.0);
        let db = 20.0 * amp.log10();
        assert!(db.abs() < 1.0, "gain {db} dB");
    }

    #[test]
    fn stopband_tone_attenuated() {
        let amp = steady_amplitude(0.1, 20.0, 0.5);
        let db = 20.0 * amp.log10();
        assert!(db < -20.0, "gain {db} dB");
    }

    #[test]
    fn cutoff_validation() {
        assert_eq!(
            highpass_filter(&[0.0], 20.0, 10.0),
            Err(FilterError::CutoffOutOfRange)
        );
        assert_eq!(
            highpass_filter(&[0.0], 20.0, 0.0),
            Err(FilterError::CutoffOutOfRange)
        );
    }
}
