//! Performance indicators computed from a closed-loop run: tracking error
//! statistics and two spectral oscillation scores on the feedback action.
//!
//! The low-frequency score looks at the 1.1-4 Hz band of the feedback
//! signal on straight sections only; the high-frequency score looks at the
//! 4-10 Hz band over the whole run. Both convert band power to dB, offset
//! it by a threshold, clamp at zero and scale, so quiet signals score zero
//! rather than minus infinity.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::controllers::SimLog;
use crate::numerics::{highpass_filter, stft_power};

/// Samples per second of the control log.
pub const METRIC_SAMPLE_RATE: f64 = 20.0;
/// Spectrogram section length, seconds.
pub const SECTION_SECONDS: f64 = 5.0;
/// Spectrogram overlap fraction.
pub const SECTION_OVERLAP: f64 = 0.5;
/// Curvature below which a path point counts as straight, 1/m.
pub const STRAIGHT_KAPPA_LIMIT: f64 = 0.01;

/// How the per-section band scores are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    MeanOfSectionMaxima,
    MaxOverSections,
}

/// One spectral oscillation score: band, pre-filter, dB threshold, scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralMetricConfig {
    pub band_lo: f64,
    pub band_hi: f64,
    pub hpf_cutoff: f64,
    pub scale: f64,
    pub threshold_db: f64,
    pub aggregation: Aggregation,
}

/// Low-frequency oscillation score.
pub const EPSILON_CONFIG: SpectralMetricConfig = SpectralMetricConfig {
    band_lo: 1.1,
    band_hi: 4.0,
    hpf_cutoff: 0.5,
    scale: 0.015,
    threshold_db: 80.0,
    aggregation: Aggregation::MeanOfSectionMaxima,
};

/// High-frequency oscillation score.
pub const ZETA_CONFIG: SpectralMetricConfig = SpectralMetricConfig {
    band_lo: 4.0,
    band_hi: 10.0,
    hpf_cutoff: 4.0,
    scale: 0.04,
    threshold_db: 80.0,
    aggregation: Aggregation::MaxOverSections,
};

/// Full metric set for one run. The spectral scores are absent (not zero)
/// when the log has no usable section.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    /// Time-averaged absolute lateral error, m.
    pub iae: f64,
    /// Unnormalized integral of |e_y|, m s.
    pub iae_raw: f64,
    /// Maximum absolute lateral error, m.
    pub mle: f64,
    pub m_epsilon: Option<f64>,
    pub m_zeta: Option<f64>,
    pub diverged: bool,
}

/// Time-averaged absolute error and the raw integral, via the trapezoid
/// rule on |e_y|.
pub fn iae(e_y: &[f64], dt: f64) -> Option<(f64, f64)> {
    if e_y.is_empty() || dt <= 0.0 {
        return None;
    }
    if e_y.len() == 1 {
        return Some((e_y[0].abs(), e_y[0].abs() * dt));
    }
    let raw: f64 = e_y.windows(2).map(|w| 0.5 * (w[0].abs() + w[1].abs()) * dt).sum();
    let duration = (e_y.len() - 1) as f64 * dt;
    Some((raw / duration, raw))
}

/// Maximum absolute error.
pub fn mle(e_y: &[f64]) -> Option<f64> {
    if e_y.is_empty() {
        return None;
    }
    Some(e_y.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// Per-section band scores under `config`: filter, spectrogram, then for
/// every spectrogram section the clamped dB excess of the in-band maximum.
fn section_scores(signal: &[f64], config: &SpectralMetricConfig) -> Vec<f64> {
    let filtered = match highpass_filter(signal, METRIC_SAMPLE_RATE, config.hpf_cutoff) {
        Ok(f) => f,
        Err(_) => return Vec::new(),
    };
    let spec = match stft_power(&filtered, METRIC_SAMPLE_RATE, SECTION_SECONDS, SECTION_OVERLAP) {
        Ok(s) => s,
        Err(_) => return Vec::new(),
    };
    (0..spec.sections())
        .map(|i| {
            let p = spec.band_max(i, config.band_lo, config.band_hi);
            // the clamp keeps quiet sections at zero instead of -inf dB
            (10.0 * p.max(f64::MIN_POSITIVE).log10() + config.threshold_db).max(0.0)
        })
        .collect()
}

fn aggregate(scores: &[f64], config: &SpectralMetricConfig) -> Option<f64> {
    if scores.is_empty() {
        return None;
    }
    let value = match config.aggregation {
        Aggregation::MeanOfSectionMaxima => scores.iter().sum::<f64>() / scores.len() as f64,
        Aggregation::MaxOverSections => scores.iter().fold(0.0f64, |m, &v| m.max(v)),
    };
    Some(config.scale * value)
}

/// Low-frequency oscillation score over the given straight stretches of the
/// feedback signal. Each stretch is analyzed independently; stretches
/// shorter than one spectrogram section are dropped. `None` when nothing
/// is long enough.
pub fn m_epsilon(u_fb: &[f64], straight_sections: &[(usize, usize)]) -> Option<f64> {
    let mut scores = Vec::new();
    for &(start, end) in straight_sections {
        if start >= end || end > u_fb.len() {
            continue;
        }
        scores.extend(section_scores(&u_fb[start..end], &EPSILON_CONFIG));
    }
    aggregate(&scores, &EPSILON_CONFIG)
}

/// High-frequency oscillation score over the whole feedback signal. `None`
/// when the signal is shorter than one spectrogram section.
pub fn m_zeta(u_fb: &[f64]) -> Option<f64> {
    aggregate(&section_scores(u_fb, &ZETA_CONFIG), &ZETA_CONFIG)
}

/// Contiguous index ranges of the log where the preview curvature stays
/// below the straightness limit, half-open, minimum one section long.
pub fn straight_sections(log: &SimLog) -> Vec<(usize, usize)> {
    let min_len = (SECTION_SECONDS * METRIC_SAMPLE_RATE) as usize;
    let mut out = Vec::new();
    let mut start = None;
    for (i, tick) in log.ticks.iter().enumerate() {
        if tick.kappa_preview.abs() < STRAIGHT_KAPPA_LIMIT {
            start.get_or_insert(i);
        } else if let Some(s) = start.take() {
            if i - s >= min_len {
                out.push((s, i));
            }
        }
    }
    if let Some(s) = start {
        if log.ticks.len() - s >= min_len {
            out.push((s, log.ticks.len()));
        }
    }
    out
}

/// All four indicators for one run.
pub fn metrics_report(log: &SimLog) -> Option<MetricsReport> {
    let e_y: Vec<f64> = log.ticks.iter().map(|t| t.e_y).collect();
    let u_fb: Vec<f64> = log.ticks.iter().map(|t| t.u_fb).collect();
    let (iae_norm, iae_raw) = iae(&e_y, log.sample_time)?;
    Some(MetricsReport {
        iae: iae_norm,
        iae_raw,
        mle: mle(&e_y)?,
        m_epsilon: m_epsilon(&u_fb, &straight_sections(log)),
        m_zeta: m_zeta(&u_fb),
        diverged: log.diverged,
    })
}
