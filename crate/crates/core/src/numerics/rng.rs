use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::{Error, Result};

/// Seeded, reproducible sample stream.
///
/// Backed by ChaCha8 (`rand_chacha`), which is portable and bit-exact across
/// platforms for a given seed and stream id. Gaussian samples use the
/// Marsaglia polar method; the second variate of each accepted pair is cached.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Independent sub-stream of the same seed.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        RngStream {
            seed,
            inner,
            spare: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform sample in `[0, 1)` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }

    /// Sample from `N(0, sigma²)`.
    ///
    /// A variate is drawn even for `sigma == 0` so that streams stay aligned
    /// when only the noise level changes between runs.
    pub fn gaussian(&mut self, sigma: f64) -> Result<f64> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::invalid(format!(
                "sigma must be finite and >= 0, got {sigma}"
            )));
        }
        let z = self.standard_normal();
        Ok(if sigma == 0.0 { 0.0 } else { sigma * z })
    }
}
