//! Deterministic pseudo-random draws shared by the repair and self-check paths.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{c, C64};

/// Generator for `(seed, stream)`; equal pairs replay equal draws.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform on `[0, 1)`.
pub fn unit(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform on `[lo, hi)`.
pub fn uniform(rng: &mut impl RngCore, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit(rng)
}

/// Real and imaginary parts uniform on `[−1, 1)`.
pub fn complex_box(rng: &mut impl RngCore) -> C64 {
    c(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0))
}
