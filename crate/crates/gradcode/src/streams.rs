//! Named deterministic random substreams.
//!
//! All randomness flows from one root seed. Each consumer (worker latency,
//! data synthesis, adversary noise, placement generation) opens a named
//! substream so components can be varied independently without perturbing the
//! others. ChaCha is used because its output is stable across platforms and
//! releases, which the byte-for-byte replay guarantees rely on.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// FNV-1a, used only to map stream names to stream ids. Stability matters
/// more than distribution quality here.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Opens the substream `domain[index]` of the given root seed.
pub fn substream(root_seed: u64, domain: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    rng.set_stream(fnv1a64(domain.as_bytes()).wrapping_add(index));
    rng
}

/// Standard normal draw via Box-Muller. Deterministic given the rng state.
pub fn standard_normal<R: rand::Rng>(rng: &mut R) -> f64 {
    loop {
        let u1: f64 = rng.gen();
        let u2: f64 = rng.gen();
        if u1 > f64::MIN_POSITIVE {
            return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        }
    }
}
