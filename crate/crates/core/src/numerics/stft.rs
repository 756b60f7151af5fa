//! Short-time Fourier power spectrogram (Hann window, direct DFT).
//!
//! Sections are short (a hundred samples at the 20 Hz control rate), so a
//! direct O(N^2) transform is cheaper than pulling in an FFT dependency.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StftError {
    #[error("signal shorter than one section")]
    SignalTooShort,
    #[error("overlap fraction must lie in [0, 1)")]
    InvalidOverlap,
    #[error("section length and sample rate must be positive")]
    InvalidSection,
}

/// Power spectrogram: one row of one-sided power per section.
///
/// Power is energy-normalized: for each section the sum over bins equals
/// the energy of the windowed signal (Parseval).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    /// Center time of each section, seconds.
    pub section_times: Vec<f64>,
    /// One-sided frequency grid, `0 ..= f_s/2`, Hz.
    pub frequencies: Vec<f64>,
    /// `power[section][bin]`, linear units, >= 0.
    pub power: Vec<Vec<f64>>,
}

impl Spectrogram {
    pub fn sections(&self) -> usize {
        self.power.len()
    }

    /// Maximum power over the bins whose frequency lies in `[lo, hi]`,
    /// for section `i`.
    pub fn band_max(&self, section: usize, lo: f64, hi: f64) -> f64 {
        self.frequencies
            .iter()
            .zip(&self.power[section])
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .map(|(_, p)| *p)
            .fold(0.0, f64::max)
    }
}

pub fn stft_power(
    signal: &[f64],
    sample_rate: f64,
    section_seconds: f64,
    overlap_fraction: f64,
) -> Result<Spectrogram, StftError> {
    if !(sample_rate > 0.0 && section_seconds > 0.0) {
        return Err(StftError::InvalidSection);
    }
    if !(0.0..1.0).contains(&overlap_fraction) {
        return Err(StftError::InvalidOverlap);
    }
    let n = (section_seconds * sample_rate).round() as usize;
    if n == 0 || signal.len() < n {
        return Err(StftError::SignalTooShort);
    }
    let hop = (((1.0 - overlap_fraction) * n as f64).round() as usize).max(1);

    let window: Vec<f64> = (0..n)
        .map(|k| 0.5 * (1.0 - (2.0 * core::f64::consts::PI * k as f64 / (n - 1) as f64).cos()))
        .collect();

    let bins = n / 2 + 1;
    let frequencies: Vec<f64> = (0..bins).map(|k| k as f64 * sample_rate / n as f64).collect();

    let mut section_times = Vec::new();
    let mut power = Vec::new();
    let mut start = 0;
    while start + n <= signal.len() {
        let windowed: Vec<f64> = (0..n).map(|k| window[k] * signal[start + k]).collect();
        let mut row = Vec::with_capacity(bins);
        for k in 0..bins {
            let mut re = 0.0;
            let mut im = 0.0;
            let w = -2.0 * core::f64::consts::PI * k as f64 / n as f64;
            for (i, &x) in windowed.iter().enumerate() {
                let phase = w * i as f64;
                re += x * phase.cos();
                im += x * phase.sin();
            }
            let mag2 = re * re + im * im;
            // one-sided energy normalization (DC and Nyquist bins unpaired)
            let scale = if k == 0 || (n % 2 == 0 && k == n / 2) { 1.0 } else { 2.0 };
            row.push(scale * mag2 / n as f64);
        }
        section_times.push((start as f64 + n as f64 / 2.0) / sample_rate);
        power.push(row);
        start += hop;
    }
    Ok(Spectrogram { section_times, frequencies, power })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use approx::assert_relative_eq;

    fn tone(freq: f64, fs: f64, seconds: f64, amp: f64) -> Vec<f64> {
        (0..(seconds * fs) as usize)
            .map(|k| amp * (2.0 * core::f64::consts::PI * freq * k as f64 / fs).sin())
            .collect()
    }

    #[test]
    fn zero_signal_zero_power() {
        let s = stft_power(&[0.0; 200], 20.0, 5.0, 0.5).unwrap();
        assert!(s.power.iter().flatten().all(|&p| p == 0.0));
    }

    #[test]
    fn tone_lands_in_the_right_bin() {
        let s = stft_power(&tone(2.0, 20.0, 20.0, 1.0), 20.0, 5.0, 0.5).unwrap();
        let bin_width = s.frequencies[1] - s.frequencies[0];
        for sec in 0..s.sections() {
            let (best, _) = s.frequencies.iter().zip(&s.power[sec]).fold(
                (0.0, 0.0),
                |(bf, bp), (&f, &p)| if p > bp { (f, p) } else { (bf, bp) },
            );
            assert!((best - 2.0).abs() <= bin_width + 1e-9, "peak at {best}");
        }
    }

    #[test]
    fn parseval_consistency() {
        let signal = tone(1.7, 20.0, 10.0, 0.8);
        let n = 100;
        let s = stft_power(&signal, 20.0, 5.0, 0.5).unwrap();
        let window: Vec<f64> = (0..n)
            .map(|k| 0.5 * (1.0 - (2.0 * core::f64::consts::PI * k as f64 / (n - 1) as f64).cos()))
            .collect();
        for (sec, row) in s.power.iter().enumerate() {
            let start = sec * 50;
            let energy: f64 = (0..n).map(|k| (window[k] * signal[start + k]).powi(2)).sum();
            let total: f64 = row.iter().sum();
            assert_relative_eq!(total, energy, max_relative = 0.01);
        }
    }

    #[test]
    fn tone_exceeds_noise_floor_by_10db() {
        // SNR 10 in power: noise variance = tone power / 10
        let fs = 20.0;
        let tone_sig = tone(3.0, fs, 30.0, 1.0);
        // deterministic pseudo-noise via a simple LCG oracle
        let mut state = 12345u64;
        let mut rand = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let sigma = (0.5f64 / 10.0).sqrt(); // tone power A^2/2 = 0.5
        let noisy: Vec<f64> = tone_sig
            .iter()
            .map(|&x| {
                // sum of 12 uniforms approximates a unit normal
                let g: f64 = (0..12).map(|_| rand()).sum();
                x + sigma * g
            })
            .collect();
        let s = stft_power(&noisy, fs, 5.0, 0.5).unwrap();
        for sec in 0..s.sections() {
            let peak = s.band_max(sec, 2.8, 3.2);
            let floor: f64 = {
                let row = &s.power[sec];
                let med = {
                    let mut v: Vec<f64> = row.clone();
                    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    v[v.len() / 2]
                };
                med.max(1e-12)
            };
            assert!(10.0 * (peak / floor).log10() > 10.0);
        }
    }

    #[test]
    fn shift_invariance_for_commensurate_shift() {
        // shifting a periodic signal by a whole number of periods leaves the
        // per-section power unchanged within 1%
        let fs = 20.0;
        let sig = tone(2.0, fs, 25.0, 1.0);
        let shift = 10; // one 2 Hz period at fs=20
        let a = stft_power(&sig[..400], fs, 5.0, 0.5).unwrap();
        let b = stft_power(&sig[shift..400 + shift], fs, 5.0, 0.5).unwrap();
        for (ra, rb) in a.power.iter().zip(&b.power) {
            let ta: f64 = ra.iter().sum();
            let tb: f64 = rb.iter().sum();
            assert_relative_eq!(ta, tb, max_relative = 0.01);
        }
    }

    #[test]
    fn short_signal_is_an_error() {
        assert_eq!(stft_power(&[0.0; 50], 20.0, 5.0, 0.5), Err(StftError::SignalTooShort));
    }
}
