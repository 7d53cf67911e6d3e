use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Counter-based generator used for every random draw in the crate.
pub type ReplicateRng = ChaCha8Rng;

/// Generator for replicate `stream` under a run seed.
pub fn replicate_rng(seed: u64, stream: u64) -> ReplicateRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `floor(u n)` for a 53-bit uniform `u` in [0, 1).
pub fn uniform_index<R: RngCore + ?Sized>(rng: &mut R, n: usize) -> usize {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    ((u * n as f64) as usize).min(n - 1)
}

/// Derive an independent seed from a base seed and a list of tags
/// (splitmix64 finalizer applied per tag).
pub fn mix_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut z = seed;
    for &t in tags {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(t.wrapping_mul(0xD6E8_FEB8_6659_FD93));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}
