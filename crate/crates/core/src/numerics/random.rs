//! Seeded, bit-reproducible sampling for the Monte Carlo campaigns.

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DistributionError {
    #[error("standard deviation must be positive")]
    NonPositiveStd,
    #[error("uniform bounds must satisfy lo < hi")]
    EmptyUniformRange,
}

/// Deterministic random stream. Cloning forks the stream state.
#[derive(Debug, Clone)]
pub struct SeedStream {
    rng: ChaCha12Rng,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha12Rng::seed_from_u64(seed) }
    }

    /// Stream for draw `index` of a campaign keyed by `seed`. Independent of
    /// the order draws are executed in, so results do not depend on
    /// parallelism.
    pub fn for_draw(seed: u64, index: u64) -> Self {
        let mut bytes = [0u8; 32];
        bytes[..8].copy_from_slice(&seed.to_le_bytes());
        bytes[8..16].copy_from_slice(&index.to_le_bytes());
        bytes[16..24].copy_from_slice(&seed.rotate_left(17).wrapping_add(0x9e37_79b9_7f4a_7c15).to_le_bytes());
        bytes[24..32].copy_from_slice(&index.wrapping_mul(0xbf58_476d_1ce4_e5b9).to_le_bytes());
        Self { rng: ChaCha12Rng::from_seed(bytes) }
    }

    /// Uniform deviate in `[0, 1)`.
    pub fn next_unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Normal { mean: f64, std: f64 },
    Uniform { lo: f64, hi: f64 },
    /// Zero-variance point mass, for degenerate (all-nominal) campaigns.
    Fixed(f64),
}

impl Distribution {
    pub fn normal(mean: f64, std: f64) -> Result<Self, DistributionError> {
        if std <= 0.0 {
            return Err(DistributionError::NonPositiveStd);
        }
        Ok(Self::Normal { mean, std })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self, DistributionError> {
        if lo >= hi {
            return Err(DistributionError::EmptyUniformRange);
        }
        Ok(Self::Uniform { lo, hi })
    }

    pub fn sample(&self, stream: &mut SeedStream) -> f64 {
        match *self {
            Distribution::Fixed(v) => v,
            Distribution::Uniform { lo, hi } => lo + (hi - lo) * stream.next_unit(),
            Distribution::Normal { mean, std } => {
                // Box-Muller on uniform deviates; the cosine branch only,
                // so every sample consumes exactly two deviates.
                let u1 = (1.0 - stream.next_unit()).max(f64::MIN_POSITIVE);
                let u2 = stream.next_unit();
                let z = (-2.0 * u1.ln()).sqrt() * (2.0 * core::f64::consts::PI * u2).cos();
                mean + std * z
            }
        }
    }

    /// Sample with rejection of non-positive values (physical parameters).
    pub fn sample_positive(&self, stream: &mut SeedStream) -> f64 {
        // rejection on a point mass would never terminate
        if let Distribution::Fixed(v) = *self {
            return v;
        }
        loop {
            let v = self.sample(stream);
            if v > 0.0 {
                return v;
            }
        }
    }
}
