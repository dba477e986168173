use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{config_err, Result};

/// Circularly-symmetric white Gaussian noise with variance `sigma_n_sq` per
/// complex sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub sigma_n_sq: f64,
    pub rng_seed: u64,
}

impl NoiseModel {
    pub fn new(sigma_n_sq: f64, rng_seed: u64) -> Result<Self> {
        if !(sigma_n_sq.is_finite() && sigma_n_sq >= 0.0) {
            return config_err(format!(
                "noise variance {sigma_n_sq} must be finite and >= 0"
            ));
        }
        Ok(Self {
            sigma_n_sq,
            rng_seed,
        })
    }
}

/// Returns `x + n` with the noise stream fully determined by the seed.
pub fn add_awgn(x: &[Complex64], noise: &NoiseModel) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(noise.rng_seed);
    add_awgn_with(x, noise.sigma_n_sq, &mut rng)
}

/// Returns `x + n` drawing from a caller-owned generator.
pub fn add_awgn_with<R: Rng + ?Sized>(
    x: &[Complex64],
    sigma_n_sq: f64,
    rng: &mut R,
) -> Vec<Complex64> {
    if sigma_n_sq == 0.0 {
        return x.to_vec();
    }
    let sd = (sigma_n_sq / 2.0).sqrt();
    x.iter()
        .map(|&v| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            v + Complex64::new(re, im) * sd
        })
        .collect()
}
