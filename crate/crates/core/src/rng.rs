//! Seed derivation and generator construction.
//!
//! The reproducibility contract: every random quantity is a deterministic
//! function of a master seed plus a static stream path. Replicate `i` of an
//! experiment draws from `derive(master, &[TAG, i])`, so results do not
//! depend on thread scheduling, and disjoint streams never overlap.

use rand_chacha::ChaCha8Rng;
use rand_pcg::Pcg64Mcg;
use rand::SeedableRng;

/// splitmix64 finalizer; bijective, well-mixed.
#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and a stream path.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    let mut s = mix(master ^ 0x6a09e667f3bcc908);
    for &p in path {
        s = mix(s ^ mix(p));
    }
    s
}

/// Main generator used for sampling; cryptographic-quality stream.
pub fn chacha(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Cheap generator for the per-grid-square lazy point field, where
/// millions of independent short streams are instantiated per sample.
pub fn pcg(seed: u64) -> Pcg64Mcg {
    Pcg64Mcg::seed_from_u64(seed)
}
