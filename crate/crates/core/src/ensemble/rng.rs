use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seed of one reproducible random stream.
///
/// The master seed keys a ChaCha20 generator and `stream` selects its
/// 64-bit stream id, so `(master, trial)` pairs give independent trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub master: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(master: u64, stream: u64) -> Self {
        RngSeed { master, stream }
    }
}

/// Random stream with the samplers the ensembles need.
///
/// Transcendental functions go through `libm` so the sequence does not
/// depend on the platform's C math library.
#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: ChaCha20Rng,
}

impl StreamRng {
    pub fn new(seed: RngSeed) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.master.to_le_bytes());
        let mut inner = ChaCha20Rng::from_seed(key);
        inner.set_stream(seed.stream);
        StreamRng { inner }
    }

    /// Uniform on [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Standard normal by the Marsaglia polar method (one value per accepted pair).
    pub fn normal(&mut self) -> f64 {
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                return u * (-2.0 * libm::log(s) / s).sqrt();
            }
        }
    }

    /// Gamma(shape, 1) by Marsaglia–Tsang; shapes below one are boosted by
    /// `U^{1/shape}`.
    pub fn gamma(&mut self, shape: f64) -> f64 {
        debug_assert!(shape > 0.0);
        if shape < 1.0 {
            let g = self.gamma(shape + 1.0);
            let u = loop {
                let u = self.uniform();
                if u > 0.0 {
                    break u;
                }
            };
            return g * libm::pow(u, 1.0 / shape);
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.normal();
            let t = 1.0 + c * x;
            if t <= 0.0 {
                continue;
            }
            let v = t * t * t;
            let u = self.uniform();
            let x2 = x * x;
            if u < 1.0 - 0.0331 * x2 * x2 {
                return d * v;
            }
            if u > 0.0 && libm::log(u) < 0.5 * x2 + d * (1.0 - v + libm::log(v)) {
                return d * v;
            }
        }
    }
}

/// One draw of the chi distribution with `dof` (possibly fractional) degrees
/// of freedom: `sqrt(2 · Gamma(dof / 2, 1))`. `dof = 0` is the point mass at 0.
pub fn chi_sample(rng: &mut StreamRng, dof: f64) -> Result<f64> {
    if !(dof >= 0.0) || !dof.is_finite() {
        return Err(Error::invalid(format!("chi degrees of freedom must be >= 0, got {dof}")));
    }
    if dof == 0.0 {
        return Ok(0.0);
    }
    Ok((2.0 * rng.gamma(0.5 * dof)).sqrt())
}
