//! Seeded, splittable random streams.
//!
//! Every randomized routine in the crate draws from ChaCha8 streams addressed
//! by `(master seed, stream index)`. Sample `i` of an estimator always reads
//! stream `i`, so results do not depend on how work is scheduled across
//! threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator used throughout the crate.
pub type StreamRng = ChaCha8Rng;

/// Seed used when the caller does not provide one.
pub const DEFAULT_SEED: u64 = 0x5eed;

/// The `index`-th independent stream of `master`.
pub fn stream(master: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Derives a child seed from `master` and a label.
///
/// The key layout differs from the one `seed_from_u64` produces, so derived
/// seeds do not alias the sample streams of the same master.
pub fn derive_seed(master: u64, label: u64) -> u64 {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master.to_le_bytes());
    key[8..16].copy_from_slice(&label.to_le_bytes());
    key[16..24].copy_from_slice(b"subseed\0");
    ChaCha8Rng::from_seed(key).next_u64()
}

/// Standard exponential variate by inversion, `-ln(1 - U)` with `U` uniform on `[0, 1)`.
pub fn standard_exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    -(1.0 - u).ln()
}
